use std::time::Duration;

use projsearch_core::bench::{
    performance_profile, read_profile, read_records, run_grid, write_profile, write_records, Limits, Metric, RunStatus,
    Solver,
};
use projsearch_core::problems;
use projsearch_core::SolverStatus;

fn limits() -> Limits {
    Limits {
        tol: 1e-5,
        max_iter: 500,
        time_limit: Some(Duration::from_secs(60)),
    }
}

fn small_suite() -> Vec<projsearch_core::BoxProblem> {
    ["quad-interior", "quad-active", "degenerate", "rosenbrock-box", "bent-path-2"]
        .iter()
        .map(|n| problems::build(n, None).unwrap())
        .collect()
}

#[test]
fn grid_is_deterministic_apart_from_timing() {
    let problems = small_suite();
    let a = run_grid(&problems, &Solver::ALL, &limits());
    let b = run_grid(&problems, &Solver::ALL, &limits());
    assert_eq!(a.len(), problems.len() * Solver::ALL.len());
    for (x, y) in a.iter().zip(&b) {
        assert!(x.same_outcome(y), "{x:?} vs {y:?}");
    }
}

#[test]
fn records_and_profiles_round_trip_through_csv() {
    let records = run_grid(&small_suite(), &[Solver::AsQWolfe, Solver::AsQArmijo], &limits());
    let mut buf = Vec::new();
    write_records(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "problem,solver,status,n_f,n_g,n_h,iterations,wall_time_s,f_final,proj_grad_norm,updates_skipped"
    );
    assert_eq!(read_records(buf.as_slice()).unwrap(), records);

    let profile = performance_profile(&records, Metric::FunctionEvaluations).unwrap();
    let mut buf = Vec::new();
    write_profile(&mut buf, &profile.curves).unwrap();
    assert_eq!(read_profile(buf.as_slice()).unwrap(), profile.curves);
}

#[test]
fn profile_curves_are_monotone_fractions() {
    let records = run_grid(&small_suite(), &[Solver::AsQWolfe, Solver::AsQArmijo, Solver::IpPdWolfe], &limits());
    for metric in [Metric::FunctionEvaluations, Metric::Iterations] {
        let profile = performance_profile(&records, metric).unwrap();
        let tau_max = profile.failure_ratio.log2();
        for c in &profile.curves {
            assert_eq!(c.points.first().unwrap().0, 0.0);
            assert_eq!(c.points.last().unwrap().0, tau_max);
            for w in c.points.windows(2) {
                assert!(w[0].0 < w[1].0 && w[0].1 <= w[1].1);
            }
            let solved = records
                .iter()
                .filter(|r| r.solver == c.solver && r.status.is_success())
                .count() as f64;
            assert_eq!(c.pi_at(tau_max), solved / 5.0);
        }
        let best_at_one: f64 = profile.curves.iter().map(|c| c.pi_at(0.0)).sum();
        assert!(best_at_one >= 1.0 - 1e-12);
    }
}

#[test]
fn iteration_limit_is_a_failure_in_the_grid() {
    let problems = vec![problems::build("rosenbrock-ext", Some(40)).unwrap()];
    let tight = Limits { max_iter: 2, ..limits() };
    let records = run_grid(&problems, &[Solver::AsQWolfe], &tight);
    assert_eq!(records[0].status, RunStatus::Solver(SolverStatus::IterLimit));
    assert!(!records[0].status.is_success());
    assert!(performance_profile(&records, Metric::FunctionEvaluations).is_err());
}
