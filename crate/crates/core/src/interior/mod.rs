//! Primal-dual interior method driven by a barrier merit function, with a
//! conventional Wolfe search or a projected quasi-Wolfe search on a box
//! around the current iterate.

mod ldl;
mod merit;

use std::time::{Duration, Instant};

pub use ldl::{factor_with_shift, Ldl};
pub use merit::{merit, merit_gradient, MeritGradient};

use merit::{merit_gradient_with, Layout, MeritObjective};

use crate::error::{Error, Result};
use crate::linesearch::{quasi_wolfe, wolfe, SearchParams};
use crate::path::{PathPoint, SearchPath};
use crate::problem::{dot, norm_inf, BoxProblem, Bounds, EvalCounter};
use crate::termination::{projected_gradient_norm, SolverReport, SolverStatus};

const UNBOUNDED_FLOOR: f64 = -1e20;

/// Primal iterate with the multipliers for its lower and upper bounds.
///
/// All vectors have full length `n`; multipliers are zero on sides without
/// a finite bound and on fixed variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    pub x: Vec<f64>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteriorVariant {
    /// Wolfe search along the straight line, capped short of the boundary.
    PdWolfe,
    /// Quasi-Wolfe search along the projection onto the shrunken box.
    PdProjQWolfe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorOptions {
    pub variant: InteriorVariant,
    pub params: SearchParams,
    /// Fraction-to-the-boundary factor.
    pub sigma: f64,
    pub mu0: f64,
    pub mu_min: f64,
    pub kkt_tol: f64,
    pub max_iter: usize,
    pub time_limit: Option<Duration>,
}

impl InteriorOptions {
    pub fn new(variant: InteriorVariant) -> Self {
        Self {
            variant,
            params: SearchParams::default(),
            sigma: 0.9,
            mu0: 1.0,
            mu_min: 1e-9,
            kkt_tol: 1e-5,
            max_iter: 500,
            time_limit: Some(Duration::from_secs(3600)),
        }
    }
}

/// Newton step for the merit function and the diagonal shift it needed.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub dx: Vec<f64>,
    pub dz1: Vec<f64>,
    pub dz2: Vec<f64>,
    pub delta: f64,
}

/// Solves `(H + delta I) dx = -(grad f - mu/(x-l) + mu/(u-x))` with
/// `H = hess f + Z1/X1 + Z2/X2`, then recovers the multiplier steps.
pub fn newton_direction(point: &PrimalDualPoint, problem: &BoxProblem) -> Result<NewtonStep> {
    let obj = problem.objective();
    let mut g = vec![0.0; point.x.len()];
    obj.gradient(&point.x, &mut g);
    let h = obj.hessian(&point.x).ok_or(Error::MissingHessian)?;
    newton_from(point, &g, &h, problem.bounds(), &Layout::new(problem.bounds()))
}

fn newton_from(p: &PrimalDualPoint, grad_f: &[f64], hess: &[f64], bounds: &Bounds, layout: &Layout) -> Result<NewtonStep> {
    let n = p.x.len();
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let mg = merit_gradient_with(p, 0.0, grad_f, bounds, layout)?;
    let free = &layout.free;
    let m = free.len();
    let mut h = vec![0.0; m * m];
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            h[a * m + b] = hess[i * n + j];
        }
        if layout.has_lo[i] {
            h[a * m + a] += p.z1[i] / (p.x[i] - lo[i]);
        }
        if layout.has_hi[i] {
            h[a * m + a] += p.z2[i] / (hi[i] - p.x[i]);
        }
    }
    let (fac, delta) = factor_with_shift(&h, m)?;
    let rhs: Vec<f64> = free.iter().map(|&i| mg.newton_rhs[i]).collect();
    let sol = fac.solve(&rhs);

    let mut dx = vec![0.0; n];
    let mut dz1 = vec![0.0; n];
    let mut dz2 = vec![0.0; n];
    for (a, &i) in free.iter().enumerate() {
        dx[i] = sol[a];
        if layout.has_lo[i] {
            let s = p.x[i] - lo[i];
            dz1[i] = -(p.z1[i] * (p.x[i] + dx[i] - lo[i]) - p.mu) / s;
        }
        if layout.has_hi[i] {
            let s = hi[i] - p.x[i];
            dz2[i] = -(p.z2[i] * (hi[i] - p.x[i] - dx[i]) - p.mu) / s;
        }
    }
    Ok(NewtonStep { dx, dz1, dz2, delta })
}

/// Clamps the packed vector `v` into
/// `[v_k - sigma (v_k - lower_v), v_k + sigma (upper_v - v_k)]`.
pub fn perturbed_projection(v: &[f64], v_k: &[f64], lower_v: &[f64], upper_v: &[f64], sigma: f64) -> Vec<f64> {
    let (lo, hi) = perturbed_box(v_k, lower_v, upper_v, sigma);
    v.iter()
        .zip(lo.iter().zip(&hi))
        .map(|(&a, (&l, &u))| a.max(l).min(u))
        .collect()
}

fn perturbed_box(v_k: &[f64], lower_v: &[f64], upper_v: &[f64], sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let lo = v_k
        .iter()
        .zip(lower_v)
        .map(|(&v, &l)| if l == f64::NEG_INFINITY { l } else { v - sigma * (v - l) })
        .collect();
    let hi = v_k
        .iter()
        .zip(upper_v)
        .map(|(&v, &u)| if u == f64::INFINITY { u } else { v + sigma * (u - v) })
        .collect();
    (lo, hi)
}

/// `max(||max(0, g x_l)||_inf, ||max(0, -g x_u)||_inf)` with `g` the
/// gradient scaled by `max(1, ||grad||_inf)` and `x_l`, `x_u` the relative
/// distances to the bounds capped at 1.
pub fn kkt_measure(x: &[f64], grad: &[f64], bounds: &Bounds) -> f64 {
    let scale = norm_inf(grad).max(1.0);
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let g = grad[i] / scale;
        let xl = if lo[i].is_finite() { ((x[i] - lo[i]) / (1.0 + lo[i].abs())).min(1.0) } else { 1.0 };
        let xu = if hi[i].is_finite() { ((hi[i] - x[i]) / (1.0 + hi[i].abs())).min(1.0) } else { 1.0 };
        worst = worst.max((g * xl).max(0.0)).max((-g * xu).max(0.0));
    }
    worst
}

/// Interior starting point: `x0` pushed off its finite bounds, duals on
/// the central path for `mu0`.
pub fn initial_point(problem: &BoxProblem, mu0: f64) -> PrimalDualPoint {
    let bounds = problem.bounds();
    let layout = Layout::new(bounds);
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let n = problem.dim();
    let mut x = problem.start().to_vec();
    let mut z1 = vec![0.0; n];
    let mut z2 = vec![0.0; n];
    for &i in &layout.free {
        let margin = if lo[i].is_finite() && hi[i].is_finite() { 1e-4 * (hi[i] - lo[i]) } else { 1e-4 };
        if layout.has_lo[i] {
            x[i] = x[i].max(lo[i] + margin);
        }
        if layout.has_hi[i] {
            x[i] = x[i].min(hi[i] - margin);
        }
        if layout.has_lo[i] {
            z1[i] = mu0 / (x[i] - lo[i]);
        }
        if layout.has_hi[i] {
            z2[i] = mu0 / (hi[i] - x[i]);
        }
    }
    PrimalDualPoint { x, z1, z2, mu: mu0 }
}

/// Evaluated state at one iterate.
struct State {
    point: PrimalDualPoint,
    f: f64,
    grad_f: Vec<f64>,
    merit: MeritGradient,
}

struct Engine<'a> {
    problem: &'a BoxProblem,
    opts: &'a InteriorOptions,
    layout: Layout,
    lower_v: Vec<f64>,
    upper_v: Vec<f64>,
    counter: EvalCounter,
    modifications: usize,
}

enum Step {
    Accepted(State),
    Failed,
}

impl<'a> Engine<'a> {
    fn new(problem: &'a BoxProblem, opts: &'a InteriorOptions) -> Self {
        let layout = Layout::new(problem.bounds());
        let m = layout.free.len();
        let (lo, hi) = (problem.bounds().lower(), problem.bounds().upper());
        let mut lower_v: Vec<f64> = layout.free.iter().map(|&i| lo[i]).collect();
        let mut upper_v: Vec<f64> = layout.free.iter().map(|&i| hi[i]).collect();
        lower_v.extend(std::iter::repeat(0.0).take(2 * m));
        upper_v.extend(std::iter::repeat(f64::INFINITY).take(2 * m));
        Self {
            problem,
            opts,
            layout,
            lower_v,
            upper_v,
            counter: EvalCounter::new(),
            modifications: 0,
        }
    }

    fn evaluate(&mut self, point: PrimalDualPoint) -> Result<State> {
        let obj = self.problem.objective();
        let f = self.counter.value(obj, &point.x)?;
        let grad_f = self.counter.gradient(obj, &point.x)?;
        self.state_from(point, f, grad_f)
    }

    fn state_from(&self, point: PrimalDualPoint, f: f64, grad_f: Vec<f64>) -> Result<State> {
        let merit = merit_gradient_with(&point, f, &grad_f, self.problem.bounds(), &self.layout)?;
        Ok(State { point, f, grad_f, merit })
    }

    fn with_mu(&self, s: State, mu: f64) -> Result<State> {
        let mut point = s.point;
        point.mu = mu;
        self.state_from(point, s.f, s.grad_f)
    }

    fn merit_grad_packed(&self, s: &State) -> Vec<f64> {
        self.layout.pack_parts(&s.merit.gx, &s.merit.gz1, &s.merit.gz2)
    }

    /// One damped Newton step on `M(.; mu)`.
    fn step(&mut self, s: &State) -> Result<Step> {
        let hess = self.counter.hessian(self.problem.objective(), &s.point.x)?;
        let newton = newton_from(&s.point, &s.grad_f, &hess, self.problem.bounds(), &self.layout)?;
        if newton.delta > 0.0 {
            self.modifications += 1;
        }
        let v = self.layout.pack(&s.point);
        let dv = self.layout.pack_parts(&newton.dx, &newton.dz1, &newton.dz2);
        let gv = self.merit_grad_packed(s);
        let slope = dot(&gv, &dv);
        if !(slope < 0.0) {
            return Ok(Step::Failed);
        }
        match self.opts.variant {
            InteriorVariant::PdWolfe => self.wolfe_step(s, &v, &dv, slope),
            InteriorVariant::PdProjQWolfe => self.projected_step(s, v, dv, gv),
        }
    }

    fn wolfe_step(&mut self, s: &State, v: &[f64], dv: &[f64], slope: f64) -> Result<Step> {
        let mut to_boundary = f64::INFINITY;
        for k in 0..v.len() {
            if dv[k] < 0.0 && self.lower_v[k].is_finite() {
                to_boundary = to_boundary.min((v[k] - self.lower_v[k]) / -dv[k]);
            } else if dv[k] > 0.0 && self.upper_v[k].is_finite() {
                to_boundary = to_boundary.min((self.upper_v[k] - v[k]) / dv[k]);
            }
        }
        let alpha_max = self.opts.params.alpha_max.min(self.opts.sigma * to_boundary);
        let params = SearchParams {
            alpha_max,
            alpha_init: self.opts.params.alpha_init.min(alpha_max),
            ..self.opts.params
        };
        let obj = self.problem.objective();
        let layout = &self.layout;
        let bounds = self.problem.bounds();
        let counter = &mut self.counter;
        let mut last: Option<State> = None;
        let outcome = wolfe(
            |alpha| {
                let trial: Vec<f64> = v.iter().zip(dv).map(|(a, d)| a + alpha * d).collect();
                let point = layout.unpack(&trial, &s.point);
                let f = counter.value(obj, &point.x).map_err(|_| Error::Evaluation { alpha })?;
                let gf = counter.gradient(obj, &point.x).map_err(|_| Error::Evaluation { alpha })?;
                let mg = merit_gradient_with(&point, f, &gf, bounds, layout)?;
                let dphi = dot(&layout.pack_parts(&mg.gx, &mg.gz1, &mg.gz2), dv);
                let value = mg.value;
                last = Some(State { point, f, grad_f: gf, merit: mg });
                Ok((value, dphi))
            },
            s.merit.value,
            slope,
            &params,
        );
        let outcome = match outcome {
            Ok(o) if o.is_success() && o.alpha > 0.0 && o.point.phi < s.merit.value => o,
            _ => return Ok(Step::Failed),
        };
        let accepted = match last {
            Some(st) if st.point == layout.unpack(&v.iter().zip(dv).map(|(a, d)| a + outcome.alpha * d).collect::<Vec<_>>(), &s.point) => st,
            _ => {
                let trial: Vec<f64> = v.iter().zip(dv).map(|(a, d)| a + outcome.alpha * d).collect();
                let point = self.layout.unpack(&trial, &s.point);
                self.evaluate(point)?
            }
        };
        Ok(Step::Accepted(accepted))
    }

    fn projected_step(&mut self, s: &State, v: Vec<f64>, dv: Vec<f64>, gv: Vec<f64>) -> Result<Step> {
        let (lo, hi) = perturbed_box(&v, &self.lower_v, &self.upper_v, self.opts.sigma);
        let omega_k = Bounds::new(lo, hi)?;
        let path = SearchPath::new(v, dv, omega_k)?;
        let base = PathPoint::at_base(&path, s.merit.value, gv);
        let objective = MeritObjective::new(self.problem, &self.layout, s.point.clone());
        let mut merit_counter = EvalCounter::new();
        let outcome = quasi_wolfe(&path, &objective, &base, &self.opts.params, &mut merit_counter);
        self.counter.n_f += merit_counter.n_f;
        self.counter.n_g += merit_counter.n_g;
        let outcome = match outcome {
            Ok(o) if o.is_success() && o.alpha > 0.0 && o.point.psi < s.merit.value => o,
            _ => return Ok(Step::Failed),
        };
        let point = self.layout.unpack(&outcome.point.x, &s.point);
        let f = objective.cached_f(&point.x);
        let g = objective.cached_grad(&point.x);
        let state = match (f, g) {
            (Some(f), Some(g)) => self.state_from(point, f, g)?,
            _ => self.evaluate(point)?,
        };
        Ok(Step::Accepted(state))
    }

    fn report(&self, s: &State, status: SolverStatus, iterations: usize) -> SolverReport {
        let bounds = self.problem.bounds();
        SolverReport {
            status,
            x_final: s.point.x.clone(),
            f_final: s.f,
            proj_grad_norm: projected_gradient_norm(&s.point.x, &s.grad_f, bounds),
            iterations,
            counters: self.counter,
            updates_applied: 0,
            updates_skipped: 0,
            hessian_modifications: self.modifications,
            kkt_measure: Some(kkt_measure(&s.point.x, &s.grad_f, bounds)),
        }
    }
}

/// Outer loop over a decreasing barrier parameter, one damped Newton step
/// per iteration. The barrier parameter drops by 10 once
/// `||grad M||_inf <= max(0.1 mu, 1e-9)`.
pub fn solve(problem: &BoxProblem, opts: &InteriorOptions) -> Result<SolverReport> {
    opts.params.validate()?;
    if !(opts.sigma > 0.0 && opts.sigma < 1.0) {
        return Err(Error::InvalidParameter("sigma must lie in (0, 1)".into()));
    }
    if !problem.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let started = Instant::now();
    let mut eng = Engine::new(problem, opts);
    let mut state = eng.evaluate(initial_point(problem, opts.mu0))?;
    let mut iterations = 0;
    let status = loop {
        if state.f < UNBOUNDED_FLOOR {
            break SolverStatus::Unbounded;
        }
        if kkt_measure(&state.point.x, &state.grad_f, problem.bounds()) <= opts.kkt_tol {
            break SolverStatus::Converged;
        }
        if iterations >= opts.max_iter {
            break SolverStatus::IterLimit;
        }
        if opts.time_limit.is_some_and(|t| started.elapsed() > t) {
            break SolverStatus::TimeLimit;
        }
        while state.point.mu > opts.mu_min && inner_done(&state, eng.layout.nv()) {
            let mu = (state.point.mu / 10.0).max(opts.mu_min);
            state = eng.with_mu(state, mu)?;
        }
        match eng.step(&state) {
            Ok(Step::Accepted(next)) => state = next,
            Ok(Step::Failed) | Err(_) => break SolverStatus::LineSearchFailure,
        }
        iterations += 1;
    };
    Ok(eng.report(&state, status, iterations))
}

fn inner_done(s: &State, _nv: usize) -> bool {
    let g = norm_inf(&s.merit.gx).max(norm_inf(&s.merit.gz1)).max(norm_inf(&s.merit.gz2));
    g <= (0.1 * s.point.mu).max(1e-9)
}

/// Minimizes `M(.; mu)` at the fixed `mu` of `start` until
/// `||grad M||_inf <= tol`. Returns the final point and the steps taken.
pub fn minimize_merit(
    problem: &BoxProblem,
    start: PrimalDualPoint,
    opts: &InteriorOptions,
    tol: f64,
) -> Result<(PrimalDualPoint, usize)> {
    if !problem.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let mut eng = Engine::new(problem, opts);
    let mut state = eng.evaluate(start)?;
    for k in 0..opts.max_iter {
        let g = norm_inf(&state.merit.gx).max(norm_inf(&state.merit.gz1)).max(norm_inf(&state.merit.gz2));
        if g <= tol {
            return Ok((state.point, k));
        }
        match eng.step(&state)? {
            Step::Accepted(next) => state = next,
            Step::Failed => return Err(Error::Evaluation { alpha: 0.0 }),
        }
    }
    Ok((state.point, opts.max_iter))
}
