//! Active-set projected-search method with an L-BFGS model.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::lbfgs::{LbfgsMemory, UpdateResult};
use crate::linesearch::{quasi_armijo, quasi_wolfe, LineSearchOutcome, SearchParams, SearchStatus};
use crate::path::{complete_point, PathPoint, SearchPath};
use crate::problem::{norm2, BoxProblem, Bounds, EvalCounter};
use crate::termination::{
    check_termination, projected_gradient_norm, SolverReport, SolverStatus, Termination,
};

/// Objective values below this are reported as unbounded.
const UNBOUNDED_FLOOR: f64 = -1e20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchKind {
    QuasiWolfe,
    QuasiArmijo,
    /// Take `x(alpha)` for a fixed `alpha` with no acceptance test.
    FixedStep(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSetOptions {
    pub search: SearchKind,
    pub params: SearchParams,
    /// L-BFGS pairs kept; 0 gives projected steepest descent.
    pub memory: usize,
    /// Cap on the working-set tolerance, also its first value.
    pub epsilon_cap: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub time_limit: Option<Duration>,
    pub record_trace: bool,
}

impl Default for ActiveSetOptions {
    fn default() -> Self {
        Self {
            search: SearchKind::QuasiWolfe,
            params: SearchParams::default(),
            memory: LbfgsMemory::DEFAULT_MEMORY,
            epsilon_cap: f64::EPSILON,
            tol: 1e-5,
            max_iter: 1_000_000,
            time_limit: Some(Duration::from_secs(3600)),
            record_trace: false,
        }
    }
}

impl ActiveSetOptions {
    pub fn quasi_wolfe() -> Self {
        Self::default()
    }

    pub fn quasi_armijo() -> Self {
        Self {
            search: SearchKind::QuasiArmijo,
            params: SearchParams::quasi_armijo(),
            ..Self::default()
        }
    }
}

/// State at the start of one iteration, plus the step taken from it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub epsilon: f64,
    pub working_set: Vec<usize>,
    /// Coordinates within `epsilon` of a bound.
    pub extended_active_set: Vec<usize>,
    /// Coordinates exactly on a bound.
    pub active_set: Vec<usize>,
    /// `grad^T p`; `None` on the final record.
    pub directional_derivative: Option<f64>,
    pub alpha: Option<f64>,
    pub update: Option<UpdateResult>,
}

/// `{i : (x_i <= l_i + eps and g_i > 0) or (x_i >= u_i - eps and g_i < 0)}`.
pub fn working_set(x: &[f64], grad: &[f64], epsilon: f64, bounds: &Bounds) -> Vec<usize> {
    let (lo, hi) = (bounds.lower(), bounds.upper());
    (0..x.len())
        .filter(|&i| (x[i] <= lo[i] + epsilon && grad[i] > 0.0) || (x[i] >= hi[i] - epsilon && grad[i] < 0.0))
        .collect()
}

/// `min(cap, ||g restricted to the complement of W||_2)`.
pub fn epsilon_update(prev_grad: &[f64], prev_working_set: &[usize], epsilon_cap: f64) -> f64 {
    let mut free = prev_grad.to_vec();
    for &i in prev_working_set {
        free[i] = 0.0;
    }
    epsilon_cap.min(norm2(&free))
}

/// Coordinates within `epsilon` of either bound.
pub fn extended_active_set(x: &[f64], epsilon: f64, bounds: &Bounds) -> Vec<usize> {
    let (lo, hi) = (bounds.lower(), bounds.upper());
    (0..x.len())
        .filter(|&i| x[i] <= lo[i] + epsilon || x[i] >= hi[i] - epsilon)
        .collect()
}

/// Coordinates exactly on a bound.
pub fn active_set(x: &[f64], bounds: &Bounds) -> Vec<usize> {
    extended_active_set(x, 0.0, bounds)
}

/// Drops the components of `d` that point toward a bound within `epsilon`.
pub fn modify_direction(d: &[f64], x: &[f64], epsilon: f64, bounds: &Bounds) -> Vec<f64> {
    let (lo, hi) = (bounds.lower(), bounds.upper());
    (0..d.len())
        .map(|i| {
            let near_lo = x[i] <= lo[i] + epsilon;
            let near_hi = x[i] >= hi[i] - epsilon;
            match (near_lo, near_hi) {
                (true, true) => 0.0,
                (true, false) => d[i].max(0.0),
                (false, true) => d[i].min(0.0),
                (false, false) => d[i],
            }
        })
        .collect()
}

/// Runs the solver and returns the per-iteration trace alongside the
/// report (empty unless `record_trace` is set).
pub fn solve_traced(problem: &BoxProblem, opts: &ActiveSetOptions) -> Result<(SolverReport, Vec<IterationRecord>)> {
    opts.params.validate()?;
    let bounds = problem.bounds();
    let obj = problem.objective();
    let started = Instant::now();
    let mut counter = EvalCounter::new();
    let mut memory = LbfgsMemory::new(opts.memory);

    let mut x = problem.start().to_vec();
    let mut f = counter.value(obj, &x)?;
    let mut g = counter.gradient(obj, &x)?;
    let mut f_prev: Option<f64> = None;
    let mut epsilon = opts.epsilon_cap;
    let mut iterations = 0usize;
    let (mut applied, mut skipped) = (0usize, 0usize);
    let mut trace = Vec::new();

    let record = |x: &[f64], f: f64, eps: f64, ws: Vec<usize>, k: usize| IterationRecord {
        iteration: k,
        x: x.to_vec(),
        f,
        epsilon: eps,
        working_set: ws,
        extended_active_set: extended_active_set(x, eps, bounds),
        active_set: active_set(x, bounds),
        directional_derivative: None,
        alpha: None,
        update: None,
    };

    let status = loop {
        if f < UNBOUNDED_FLOOR {
            break SolverStatus::Unbounded;
        }
        if check_termination(&x, &g, f, f_prev, bounds, opts.tol) == Termination::Converged {
            break SolverStatus::Converged;
        }
        if iterations >= opts.max_iter {
            break SolverStatus::IterLimit;
        }
        if opts.time_limit.is_some_and(|t| started.elapsed() > t) {
            break SolverStatus::TimeLimit;
        }

        let ws = working_set(&x, &g, epsilon, bounds);
        let mut free = vec![true; x.len()];
        for &i in &ws {
            free[i] = false;
        }
        let d = memory.reduced_direction(&g, &free);
        let p = modify_direction(&d, &x, epsilon, bounds);
        let next_epsilon = epsilon_update(&g, &ws, opts.epsilon_cap);

        let mut rec = opts.record_trace.then(|| record(&x, f, epsilon, ws, iterations));
        let path = SearchPath::new(x.clone(), p, bounds.clone())?;
        let base = PathPoint::at_base(&path, f, g.clone());
        if let Some(r) = rec.as_mut() {
            r.directional_derivative = Some(base.dpsi_plus);
        }
        if !(base.dpsi_plus < 0.0) {
            if let Some(r) = rec {
                trace.push(r);
            }
            break failure_status(&x, &g, f, bounds, opts.tol);
        }

        let step = match opts.search {
            SearchKind::QuasiWolfe => quasi_wolfe(&path, obj, &base, &opts.params, &mut counter),
            SearchKind::QuasiArmijo => quasi_armijo(&path, obj, &base, &opts.params, &mut counter),
            SearchKind::FixedStep(alpha) => fixed_step(&path, problem, alpha, &mut counter),
        };
        let accepted = match step {
            Ok(out) if out.is_success() && out.alpha > 0.0 => out.point,
            _ => {
                if let Some(r) = rec {
                    trace.push(r);
                }
                break failure_status(&x, &g, f, bounds, opts.tol);
            }
        };

        let s: Vec<f64> = accepted.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = accepted.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        let update = if norm2(&s) > 0.0 {
            let u = memory.update(&s, &y);
            match u {
                UpdateResult::Applied => applied += 1,
                UpdateResult::Skipped => skipped += 1,
            }
            Some(u)
        } else {
            None
        };
        if let Some(mut r) = rec {
            r.alpha = Some(accepted.alpha);
            r.update = update;
            trace.push(r);
        }

        f_prev = Some(f);
        x = accepted.x;
        f = accepted.psi;
        g = accepted.grad;
        epsilon = next_epsilon;
        iterations += 1;
    };

    if opts.record_trace {
        let ws = working_set(&x, &g, epsilon, bounds);
        trace.push(record(&x, f, epsilon, ws, iterations));
    }

    let report = SolverReport {
        status,
        proj_grad_norm: projected_gradient_norm(&x, &g, bounds),
        x_final: x,
        f_final: f,
        iterations,
        counters: counter,
        updates_applied: applied,
        updates_skipped: skipped,
        hessian_modifications: 0,
        kkt_measure: None,
    };
    Ok((report, trace))
}

pub fn solve(problem: &BoxProblem, opts: &ActiveSetOptions) -> Result<SolverReport> {
    solve_traced(problem, opts).map(|(r, _)| r)
}

/// A failed search at a point that already passes the projected-gradient
/// test is reported as `SmallChange`.
fn failure_status(x: &[f64], g: &[f64], f: f64, bounds: &Bounds, tol: f64) -> SolverStatus {
    if projected_gradient_norm(x, g, bounds) <= tol * (1.0 + f.abs()) {
        SolverStatus::SmallChange
    } else {
        SolverStatus::LineSearchFailure
    }
}

fn fixed_step(path: &SearchPath, problem: &BoxProblem, alpha: f64, counter: &mut EvalCounter) -> Result<LineSearchOutcome> {
    let start = *counter;
    let x = path.point(alpha);
    let f = counter.value(problem.objective(), &x)?;
    let g = counter.gradient(problem.objective(), &x)?;
    let point = complete_point(path, alpha, x, f, g);
    Ok(LineSearchOutcome {
        alpha,
        point,
        status: SearchStatus::Armijo,
        flags: Default::default(),
        evals: counter.since(&start),
        trials: Vec::new(),
        brackets: Vec::new(),
    })
}
