//! Command-line front end: `solve`, `bench` and `check`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, Limits, Metric, Solver};
use crate::problem::BoxProblem;
use crate::problems::{self, Tag};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "projsearch", about = "Projected-search solvers for bound-constrained problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one catalog problem and print a summary.
    Solve(SolveArgs),
    /// Run a solver-by-problem grid and write records and profiles.
    Bench(BenchArgs),
    /// Compare analytic derivatives with finite differences.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
}

impl LimitArgs {
    fn limits(&self) -> Result<Limits, String> {
        if !(self.tol > 0.0) || !(self.time_limit > 0.0) {
            return Err("--tol and --time-limit must be positive".into());
        }
        Ok(Limits {
            tol: self.tol,
            max_iter: self.max_iter,
            time_limit: Some(Duration::from_secs_f64(self.time_limit)),
        })
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    solver: Solver,
    #[command(flatten)]
    limits: LimitArgs,
    /// Write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// `all`, `bent-path`, `hessian`, or a comma-separated list of problem names.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, value_delimiter = ',', default_value = "as-qwolfe,as-qarmijo")]
    solvers: Vec<Solver>,
    /// `nf` or `iterations`.
    #[arg(long, default_value = "nf")]
    metric: Metric,
    #[arg(long, default_value = "records.csv")]
    out_records: PathBuf,
    #[arg(long, default_value = "profile.csv")]
    out_profile: PathBuf,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    n: Option<usize>,
    /// Random interior points in addition to the start point.
    #[arg(long, default_value_t = 10)]
    points: usize,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

enum Failure {
    Usage(String),
    Run(String),
}

fn build_problem(name: &str, n: Option<usize>) -> Result<BoxProblem, Failure> {
    problems::build(name, n).map_err(|e| Failure::Usage(e.to_string()))
}

fn solve(a: SolveArgs) -> Result<i32, Failure> {
    let limits = a.limits.limits().map_err(Failure::Usage)?;
    let problem = build_problem(&a.problem, a.n)?;
    let report = bench::run_solver(&problem, a.solver, &limits).map_err(|e| Failure::Run(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "problem      {} (n = {})", problem.name(), problem.dim());
    let _ = writeln!(out, "solver       {}", a.solver);
    let _ = writeln!(out, "status       {}", report.status);
    let _ = writeln!(out, "f            {:.10e}", report.f_final);
    let _ = writeln!(out, "proj grad    {:.3e}", report.proj_grad_norm);
    if let Some(k) = report.kkt_measure {
        let _ = writeln!(out, "kkt          {k:.3e}");
    }
    let _ = writeln!(out, "iterations   {}", report.iterations);
    let _ = writeln!(
        out,
        "evaluations  f {}  g {}  h {}",
        report.counters.n_f, report.counters.n_g, report.counters.n_h
    );
    let _ = writeln!(out, "updates      applied {}  skipped {}", report.updates_applied, report.updates_skipped);
    if let Some(path) = a.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Run(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
    }
    Ok(if report.status.is_success() { EXIT_OK } else { EXIT_FAILURE })
}

fn suite(name: &str) -> Result<Vec<BoxProblem>, Failure> {
    let entries = problems::catalog();
    let chosen: Vec<_> = match name {
        "all" => entries,
        "bent-path" => entries.into_iter().filter(|s| s.has_tag(Tag::BentPath)).collect(),
        "hessian" => entries.into_iter().filter(|s| s.has_tag(Tag::HasHessian)).collect(),
        list => {
            return list.split(',').map(|n| build_problem(n.trim(), None)).collect();
        }
    };
    chosen
        .iter()
        .map(|s| s.build(None).map_err(|e| Failure::Run(e.to_string())))
        .collect()
}

fn bench_cmd(a: BenchArgs) -> Result<i32, Failure> {
    let limits = a.limits.limits().map_err(Failure::Usage)?;
    if a.solvers.is_empty() {
        return Err(Failure::Usage("--solvers must name at least one solver".into()));
    }
    let problems = suite(&a.suite)?;
    let records = bench::run_grid(&problems, &a.solvers, &limits);
    bench::write_records_file(&a.out_records, &records).map_err(|e| Failure::Run(e.to_string()))?;

    let mut out = std::io::stdout().lock();
    for s in &a.solvers {
        let mine: Vec<_> = records.iter().filter(|r| r.solver == s.as_str()).collect();
        let solved = mine.iter().filter(|r| r.status.is_success()).count();
        let n_f: usize = mine.iter().map(|r| r.n_f).sum();
        let skipped: usize = mine.iter().map(|r| r.updates_skipped).sum();
        let _ = writeln!(out, "{s:<18} solved {solved}/{}  n_f {n_f}  skipped {skipped}", mine.len());
    }
    match bench::performance_profile(&records, a.metric) {
        Ok(profile) => {
            for w in &profile.warnings {
                eprintln!("warning: {w}");
            }
            bench::write_profile_file(&a.out_profile, &profile.curves).map_err(|e| Failure::Run(e.to_string()))?;
        }
        Err(e) => eprintln!("warning: no profile written: {e}"),
    }
    Ok(EXIT_OK)
}

fn check(a: CheckArgs) -> Result<i32, Failure> {
    let problem = build_problem(&a.problem, a.n)?;
    let c = problems::derivative_check(&problem, a.points);
    println!("max gradient discrepancy {:.3e}", c.gradient);
    let mut ok = c.gradient <= 1e-5;
    if let Some(h) = c.hessian {
        println!("max hessian discrepancy  {h:.3e}");
        ok &= h <= 1e-4;
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}
