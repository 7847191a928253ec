//! Solver-by-problem benchmark grids and performance profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::active_set::{self, ActiveSetOptions};
use crate::error::{Error, Result};
use crate::interior::{self, InteriorOptions, InteriorVariant};
use crate::problem::BoxProblem;
use crate::termination::{SolverReport, SolverStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    AsQWolfe,
    AsQArmijo,
    IpPdWolfe,
    IpPdProjQWolfe,
}

impl Solver {
    pub const ALL: [Solver; 4] = [Solver::AsQWolfe, Solver::AsQArmijo, Solver::IpPdWolfe, Solver::IpPdProjQWolfe];

    pub fn as_str(&self) -> &'static str {
        match self {
            Solver::AsQWolfe => "as-qwolfe",
            Solver::AsQArmijo => "as-qarmijo",
            Solver::IpPdWolfe => "ip-pd-wolfe",
            Solver::IpPdProjQWolfe => "ip-pdproj-qwolfe",
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self, Solver::IpPdWolfe | Solver::IpPdProjQWolfe)
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Solver::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown solver '{s}'"))
    }
}

/// Stopping limits shared by every cell of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub tol: f64,
    pub max_iter: usize,
    pub time_limit: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 500,
            time_limit: Some(Duration::from_secs(60)),
        }
    }
}

/// Runs one solver on one problem.
pub fn run_solver(problem: &BoxProblem, solver: Solver, limits: &Limits) -> Result<SolverReport> {
    match solver {
        Solver::AsQWolfe | Solver::AsQArmijo => {
            let mut opts = if solver == Solver::AsQWolfe {
                ActiveSetOptions::quasi_wolfe()
            } else {
                ActiveSetOptions::quasi_armijo()
            };
            opts.tol = limits.tol;
            opts.max_iter = limits.max_iter;
            opts.time_limit = limits.time_limit;
            active_set::solve(problem, &opts)
        }
        Solver::IpPdWolfe | Solver::IpPdProjQWolfe => {
            let variant = if solver == Solver::IpPdWolfe {
                InteriorVariant::PdWolfe
            } else {
                InteriorVariant::PdProjQWolfe
            };
            let mut opts = InteriorOptions::new(variant);
            opts.kkt_tol = limits.tol;
            opts.max_iter = limits.max_iter;
            opts.time_limit = limits.time_limit;
            interior::solve(problem, &opts)
        }
    }
}

/// Outcome of a grid cell: a solver status, or the interior method
/// breaking down (no usable Newton system or merit value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunStatus {
    Solver(SolverStatus),
    InteriorFailure,
}

impl RunStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Solver(s) if s.is_success())
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Solver(s) => f.write_str(s.as_str()),
            RunStatus::InteriorFailure => f.write_str("InteriorFailure"),
        }
    }
}

impl FromStr for RunStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "InteriorFailure" {
            Ok(RunStatus::InteriorFailure)
        } else {
            s.parse().map(RunStatus::Solver)
        }
    }
}

impl Serialize for RunStatus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RunStatus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    pub status: RunStatus,
    pub n_f: usize,
    pub n_g: usize,
    pub n_h: usize,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub f_final: f64,
    pub proj_grad_norm: f64,
    pub updates_skipped: usize,
}

impl RunRecord {
    pub fn from_report(problem: &str, solver: &str, report: &SolverReport, wall_time_s: f64) -> Self {
        Self {
            problem: problem.to_string(),
            solver: solver.to_string(),
            status: RunStatus::Solver(report.status),
            n_f: report.counters.n_f,
            n_g: report.counters.n_g,
            n_h: report.counters.n_h,
            iterations: report.iterations,
            wall_time_s,
            f_final: report.f_final,
            proj_grad_norm: report.proj_grad_norm,
            updates_skipped: report.updates_skipped,
        }
    }

    /// Equality ignoring `wall_time_s`.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        let mut a = self.clone();
        a.wall_time_s = other.wall_time_s;
        a == *other
    }
}

/// Runs every (problem, solver) pair; failures become records. Records are
/// sorted by (problem, solver).
pub fn run_grid(problems: &[BoxProblem], solvers: &[Solver], limits: &Limits) -> Vec<RunRecord> {
    let mut records = Vec::with_capacity(problems.len() * solvers.len());
    for problem in problems {
        for &solver in solvers {
            records.push(run_cell(problem, solver, limits));
        }
    }
    sort_records(&mut records);
    records
}

fn run_cell(problem: &BoxProblem, solver: Solver, limits: &Limits) -> RunRecord {
    let started = Instant::now();
    let result = run_solver(problem, solver, limits);
    let wall = started.elapsed().as_secs_f64();
    match result {
        Ok(report) => RunRecord::from_report(problem.name(), solver.as_str(), &report, wall),
        Err(_) => {
            let status = if solver.is_interior() {
                RunStatus::InteriorFailure
            } else {
                RunStatus::Solver(SolverStatus::LineSearchFailure)
            };
            RunRecord {
                problem: problem.name().to_string(),
                solver: solver.as_str().to_string(),
                status,
                n_f: 0,
                n_g: 0,
                n_h: 0,
                iterations: 0,
                wall_time_s: wall,
                f_final: f64::NAN,
                proj_grad_norm: f64::NAN,
                updates_skipped: 0,
            }
        }
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| (&a.problem, &a.solver).cmp(&(&b.problem, &b.solver)));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    FunctionEvaluations,
    Iterations,
}

impl Metric {
    fn cost(&self, r: &RunRecord) -> f64 {
        let raw = match self {
            Metric::FunctionEvaluations => r.n_f,
            Metric::Iterations => r.iterations,
        };
        raw.max(1) as f64
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nf" => Ok(Metric::FunctionEvaluations),
            "iterations" | "iter" => Ok(Metric::Iterations),
            other => Err(format!("unknown metric '{other}'")),
        }
    }
}

/// Step curve of `pi_s(tau)`; `pi` holds at `tau` and up to the next point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub solver: String,
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// `pi_s(tau)` read off the step curve.
    pub fn pi_at(&self, tau: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(t, _)| *t <= tau)
            .last()
            .map_or(0.0, |(_, p)| *p)
    }
}

/// Profile curves plus notes about problems no solver handled.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub curves: Vec<ProfileCurve>,
    /// Ratio assigned to failed runs: twice the largest finite ratio.
    pub failure_ratio: f64,
    pub warnings: Vec<String>,
}

/// Dolan-More profiles over `tau = log2(ratio)` in `[0, log2(failure_ratio)]`.
///
/// Costs are floored at 1. Failed runs get twice the largest finite ratio
/// in the record set and are never counted as solved. Problems every solver
/// failed stay in `n_p` and produce a warning.
pub fn performance_profile(records: &[RunRecord], metric: Metric) -> Result<Profile> {
    let solvers: BTreeSet<&str> = records.iter().map(|r| r.solver.as_str()).collect();
    let problems: BTreeSet<&str> = records.iter().map(|r| r.problem.as_str()).collect();
    if solvers.is_empty() {
        return Err(Error::Profile("no records".into()));
    }
    let mut cost: BTreeMap<(&str, &str), Option<f64>> = BTreeMap::new();
    for r in records {
        let c = r.status.is_success().then(|| metric.cost(r));
        if cost.insert((r.problem.as_str(), r.solver.as_str()), c).is_some() {
            return Err(Error::Profile(format!("duplicate record for ({}, {})", r.problem, r.solver)));
        }
    }
    if cost.len() != solvers.len() * problems.len() {
        return Err(Error::Profile("every (problem, solver) pair must appear exactly once".into()));
    }

    let mut warnings = Vec::new();
    let mut ratios: BTreeMap<(&str, &str), Option<f64>> = BTreeMap::new();
    let mut max_ratio: f64 = 0.0;
    for &p in &problems {
        let best = solvers.iter().filter_map(|&s| cost[&(p, s)]).fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            warnings.push(format!("problem '{p}' was not solved by any solver"));
        }
        for &s in &solvers {
            let r = cost[&(p, s)].map(|c| c / best);
            if let Some(r) = r {
                max_ratio = max_ratio.max(r);
            }
            ratios.insert((p, s), r);
        }
    }
    if max_ratio == 0.0 {
        return Err(Error::Profile("no solver solved any problem".into()));
    }
    let failure_ratio = 2.0 * max_ratio;
    let tau_max = failure_ratio.log2();
    let n_p = problems.len() as f64;

    let curves = solvers
        .iter()
        .map(|&s| {
            let mut taus: Vec<f64> = problems.iter().filter_map(|&p| ratios[&(p, s)]).map(f64::log2).collect();
            taus.push(0.0);
            taus.push(tau_max);
            taus.sort_by(f64::total_cmp);
            taus.dedup();
            let points = taus
                .into_iter()
                .map(|tau| {
                    let solved = problems
                        .iter()
                        .filter(|&&p| ratios[&(p, s)].is_some_and(|r| r.log2() <= tau))
                        .count();
                    (tau, solved as f64 / n_p)
                })
                .collect();
            ProfileCurve {
                solver: s.to_string(),
                points,
            }
        })
        .collect();
    Ok(Profile {
        curves,
        failure_ratio,
        warnings,
    })
}

#[derive(Serialize, Deserialize)]
struct ProfileRow {
    solver: String,
    tau: f64,
    pi: f64,
}

pub fn write_records<W: io::Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(out);
    for r in &sorted {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Profile(e.to_string()))
}

pub fn read_records<R: io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize().map(|r| r.map_err(csv_error)).collect()
}

pub fn write_profile<W: io::Write>(out: W, curves: &[ProfileCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in curves {
        for &(tau, pi) in &c.points {
            w.serialize(ProfileRow {
                solver: c.solver.clone(),
                tau,
                pi,
            })
            .map_err(csv_error)?;
        }
    }
    w.flush().map_err(|e| Error::Profile(e.to_string()))
}

pub fn read_profile<R: io::Read>(input: R) -> Result<Vec<ProfileCurve>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut curves: Vec<ProfileCurve> = Vec::new();
    for row in rd.deserialize::<ProfileRow>() {
        let row = row.map_err(csv_error)?;
        match curves.last_mut() {
            Some(c) if c.solver == row.solver => c.points.push((row.tau, row.pi)),
            _ => curves.push(ProfileCurve {
                solver: row.solver,
                points: vec![(row.tau, row.pi)],
            }),
        }
    }
    Ok(curves)
}

pub fn write_records_file(path: &Path, records: &[RunRecord]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Profile(format!("{}: {e}", path.display())))?;
    write_records(f, records)
}

pub fn write_profile_file(path: &Path, curves: &[ProfileCurve]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Profile(format!("{}: {e}", path.display())))?;
    write_profile(f, curves)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Profile(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(problem: &str, solver: &str, n_f: usize, ok: bool) -> RunRecord {
        RunRecord {
            problem: problem.into(),
            solver: solver.into(),
            status: RunStatus::Solver(if ok { SolverStatus::Converged } else { SolverStatus::IterLimit }),
            n_f,
            n_g: n_f,
            n_h: 0,
            iterations: n_f / 2,
            wall_time_s: 0.0,
            f_final: 0.0,
            proj_grad_norm: 0.0,
            updates_skipped: 0,
        }
    }

    #[test]
    fn two_by_two_example() {
        let records = vec![
            rec("p1", "A", 10, true),
            rec("p1", "B", 20, true),
            rec("p2", "A", 30, true),
            rec("p2", "B", 15, true),
        ];
        let prof = performance_profile(&records, Metric::FunctionEvaluations).unwrap();
        for c in &prof.curves {
            assert_eq!(c.pi_at(0.0), 0.5);
            assert_eq!(c.pi_at(0.999), 0.5);
            assert_eq!(c.pi_at(1.0), 1.0);
        }
        assert_eq!(prof.failure_ratio, 4.0);
    }

    #[test]
    fn single_solver_is_always_best() {
        let records = vec![rec("p1", "A", 7, true), rec("p2", "A", 0, true)];
        let prof = performance_profile(&records, Metric::FunctionEvaluations).unwrap();
        assert_eq!(prof.curves[0].pi_at(0.0), 1.0);
    }

    #[test]
    fn failure_saturates_below_one() {
        let records = vec![
            rec("p1", "A", 10, true),
            rec("p1", "B", 30, true),
            rec("p2", "A", 10, false),
            rec("p2", "B", 10, true),
        ];
        let prof = performance_profile(&records, Metric::FunctionEvaluations).unwrap();
        assert_eq!(prof.failure_ratio, 6.0);
        let a = &prof.curves[0];
        assert_eq!(a.solver, "A");
        assert_eq!(a.pi_at(6f64.log2()), 0.5);
        let b = &prof.curves[1];
        assert_eq!(b.pi_at(0.0), 0.5);
        assert_eq!(b.pi_at(3f64.log2()), 1.0);
    }

    #[test]
    fn all_failed_problem_warns_and_counts() {
        let records = vec![
            rec("p1", "A", 10, true),
            rec("p2", "A", 10, false),
        ];
        let prof = performance_profile(&records, Metric::FunctionEvaluations).unwrap();
        assert_eq!(prof.warnings.len(), 1);
        assert_eq!(prof.curves[0].pi_at(100.0), 0.5);
    }

    #[test]
    fn missing_pair_is_rejected() {
        let records = vec![rec("p1", "A", 10, true), rec("p1", "B", 10, true), rec("p2", "A", 1, true)];
        assert!(performance_profile(&records, Metric::FunctionEvaluations).is_err());
        let none = vec![rec("p1", "A", 10, false)];
        assert!(performance_profile(&none, Metric::FunctionEvaluations).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![rec("p2", "B", 15, true), rec("p1", "A", 10, false)];
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "problem,solver,status,n_f,n_g,n_h,iterations,wall_time_s,f_final,proj_grad_norm,updates_skipped\n"
        ));
        let back = read_records(buf.as_slice()).unwrap();
        assert_eq!(back[0], records[1]);
        assert_eq!(back[1], records[0]);

        let prof = performance_profile(&records_full(), Metric::FunctionEvaluations).unwrap();
        let mut out = Vec::new();
        write_profile(&mut out, &prof.curves).unwrap();
        assert!(String::from_utf8(out.clone()).unwrap().starts_with("solver,tau,pi\n"));
        assert_eq!(read_profile(out.as_slice()).unwrap(), prof.curves);
    }

    fn records_full() -> Vec<RunRecord> {
        vec![
            rec("p1", "A", 10, true),
            rec("p1", "B", 20, true),
            rec("p2", "A", 30, true),
            rec("p2", "B", 15, true),
        ]
    }

    #[test]
    fn names_parse() {
        for s in Solver::ALL {
            assert_eq!(s.as_str().parse::<Solver>().unwrap(), s);
        }
        assert_eq!("InteriorFailure".parse::<RunStatus>().unwrap(), RunStatus::InteriorFailure);
    }
}
