use projsearch_core::bench::{read_profile, read_records};
use projsearch_core::cli::{cli_main, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use projsearch_core::problems;

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("projsearch").chain(args.iter().copied()))
}

#[test]
fn solve_succeeds_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let code = run(&[
        "solve",
        "--problem",
        "quad-interior",
        "--solver",
        "as-qwolfe",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["status"], "Converged");
    assert_eq!(v["x_final"].as_array().unwrap().len(), 10);
}

#[test]
fn every_solver_runs_from_the_cli() {
    for solver in ["as-qwolfe", "as-qarmijo", "ip-pd-wolfe", "ip-pdproj-qwolfe"] {
        assert_eq!(run(&["solve", "--problem", "quad-active", "--n", "6", "--solver", solver]), EXIT_OK, "{solver}");
    }
}

#[test]
fn unconverged_solve_exits_with_failure() {
    let code = run(&["solve", "--problem", "rosenbrock-ext", "--solver", "as-qwolfe", "--max-iter", "1"]);
    assert_eq!(code, EXIT_FAILURE);
}

#[test]
fn bad_input_is_a_usage_error() {
    assert_eq!(run(&["solve", "--problem", "no-such-problem", "--solver", "as-qwolfe"]), EXIT_USAGE);
    assert_eq!(run(&["solve", "--problem", "quad-interior", "--solver", "newton"]), EXIT_USAGE);
    assert_eq!(run(&["solve", "--problem", "quad-interior", "--solver", "as-qwolfe", "--tol=0"]), EXIT_USAGE);
    assert_eq!(run(&["solve", "--problem", "rosenbrock-ext", "--n", "7", "--solver", "as-qwolfe"]), EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run(&[]), EXIT_USAGE);
}

#[test]
fn bench_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    let profile = dir.path().join("profile.csv");
    let code = run(&[
        "bench",
        "--suite",
        "bent-path",
        "--out-records",
        records.to_str().unwrap(),
        "--out-profile",
        profile.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let rows = read_records(std::fs::File::open(&records).unwrap()).unwrap();
    assert_eq!(rows.len(), problems::BENT_PATH_INSTANCES * 2);
    let curves = read_profile(std::fs::File::open(&profile).unwrap()).unwrap();
    let names: Vec<_> = curves.iter().map(|c| c.solver.as_str()).collect();
    assert_eq!(names, ["as-qarmijo", "as-qwolfe"]);
}

#[test]
fn bench_accepts_an_explicit_list() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("r.csv");
    let code = run(&[
        "bench",
        "--suite",
        "quad-interior,degenerate",
        "--solvers",
        "ip-pd-wolfe,ip-pdproj-qwolfe,as-qwolfe",
        "--metric",
        "iterations",
        "--out-records",
        records.to_str().unwrap(),
        "--out-profile",
        dir.path().join("p.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(read_records(std::fs::File::open(&records).unwrap()).unwrap().len(), 6);
}

#[test]
fn check_passes_on_catalog_problems() {
    for name in ["rosenbrock-box", "bent-path-5", "quartic-nonconvex"] {
        assert_eq!(run(&["check", "--problem", name]), EXIT_OK, "{name}");
    }
}
