//! Native catalog of bound-constrained test problems.
//!
//! Every problem has an analytic gradient and Hessian.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{finite_difference_gradient, norm_inf, BoxProblem, Bounds, FnObjective, Objective};
use crate::termination::projected_gradient_norm;

const INF: f64 = f64::INFINITY;

/// Number of instances in the bent-path family.
pub const BENT_PATH_INSTANCES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Smooth,
    Convex,
    Nonconvex,
    Degenerate,
    BentPath,
    HasHessian,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Smooth => "smooth",
            Tag::Convex => "convex",
            Tag::Nonconvex => "nonconvex",
            Tag::Degenerate => "degenerate",
            Tag::BentPath => "bent-path",
            Tag::HasHessian => "has-hessian",
        })
    }
}

/// A stationary point with its value and active set.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownSolution {
    pub x: Vec<f64>,
    pub f: f64,
    /// Indices with `x_i` on a bound, ascending.
    pub active: Vec<usize>,
}

type Builder = dyn Fn(usize) -> Result<(BoxProblem, Option<KnownSolution>)> + Send + Sync;

#[derive(Clone)]
pub struct ProblemEntry {
    pub name: String,
    pub description: &'static str,
    /// Dimension used when none is requested.
    pub default_n: usize,
    pub scalable: bool,
    pub tags: Vec<Tag>,
    builder: Arc<Builder>,
}

impl fmt::Debug for ProblemEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemEntry")
            .field("name", &self.name)
            .field("default_n", &self.default_n)
            .field("tags", &self.tags)
            .finish()
    }
}

impl ProblemEntry {
    fn new<B>(name: impl Into<String>, description: &'static str, default_n: usize, scalable: bool, tags: &[Tag], builder: B) -> Self
    where
        B: Fn(usize) -> Result<(BoxProblem, Option<KnownSolution>)> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            description,
            default_n,
            scalable,
            tags: tags.to_vec(),
            builder: Arc::new(builder),
        }
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    /// Builds the instance; `n` is ignored for fixed-size problems.
    pub fn build(&self, n: Option<usize>) -> Result<BoxProblem> {
        Ok(self.build_with_solution(n)?.0)
    }

    pub fn known_solution(&self, n: Option<usize>) -> Result<Option<KnownSolution>> {
        Ok(self.build_with_solution(n)?.1)
    }

    pub fn build_with_solution(&self, n: Option<usize>) -> Result<(BoxProblem, Option<KnownSolution>)> {
        let n = if self.scalable { n.unwrap_or(self.default_n) } else { self.default_n };
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        (self.builder)(n)
    }
}

/// Every problem in the library, in a fixed order.
pub fn catalog() -> Vec<ProblemEntry> {
    use Tag::*;
    let mut entries = vec![
        ProblemEntry::new(
            "quad-interior",
            "diagonal convex quadratic, solution strictly inside [0,1]^n",
            10,
            true,
            &[Smooth, Convex, HasHessian],
            quad_interior,
        ),
        ProblemEntry::new(
            "quad-active",
            "diagonal convex quadratic with nondegenerate active lower and upper bounds",
            12,
            true,
            &[Smooth, Convex, HasHessian],
            quad_active,
        ),
        ProblemEntry::new(
            "degenerate",
            "f = |x|^2 / 5 on x >= 0 from (1, ..., 1); zero gradient at the active solution",
            2,
            true,
            &[Smooth, Convex, Degenerate, HasHessian],
            degenerate,
        ),
        ProblemEntry::new(
            "rosenbrock-box",
            "two-variable Rosenbrock with x1 <= 0.8",
            2,
            false,
            &[Smooth, Nonconvex, HasHessian],
            rosenbrock,
        ),
        ProblemEntry::new(
            "rosenbrock-ext",
            "extended Rosenbrock, n/2 independent bounded pairs",
            100,
            true,
            &[Smooth, Nonconvex, HasHessian],
            rosenbrock,
        ),
        ProblemEntry::new(
            "linear-box",
            "f = sum x_i on [0,1]^n, vertex solution at the origin",
            10,
            true,
            &[Smooth, Convex, HasHessian],
            linear_box,
        ),
        ProblemEntry::new(
            "quad-illcond",
            "diagonal quadratic with condition number 1e6 and some active bounds",
            10,
            true,
            &[Smooth, Convex, HasHessian],
            quad_illcond,
        ),
        ProblemEntry::new(
            "quartic-nonconvex",
            "separable double-well quartic with indefinite Hessian near the start",
            8,
            true,
            &[Smooth, Nonconvex, HasHessian],
            quartic_nonconvex,
        ),
    ];
    for k in 0..BENT_PATH_INSTANCES {
        entries.push(ProblemEntry::new(
            format!("bent-path-{k}"),
            "two variables on x >= 0 with the minimizer on the x2 axis; descent directions cross x1 = 0 first",
            2,
            false,
            &[Smooth, Nonconvex, BentPath, HasHessian],
            move |_| bent_path(k),
        ));
    }
    entries
}

pub fn names() -> Vec<String> {
    catalog().into_iter().map(|s| s.name).collect()
}

pub fn find(name: &str) -> Result<ProblemEntry> {
    catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))
}

/// Builds a catalog problem by name.
pub fn build(name: &str, n: Option<usize>) -> Result<BoxProblem> {
    find(name)?.build(n)
}

fn diag_hessian(d: Vec<f64>) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync {
    move |_| {
        let n = d.len();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = d[i];
        }
        h
    }
}

/// `0.5 sum d_i (x_i - c_i)^2` with its Hessian.
fn diag_quadratic(d: Vec<f64>, c: Vec<f64>) -> FnObjective {
    let (d1, c1) = (d.clone(), c.clone());
    let (d2, c2) = (d.clone(), c);
    FnObjective::new(
        move |x| 0.5 * x.iter().zip(&d1).zip(&c1).map(|((x, d), c)| d * (x - c) * (x - c)).sum::<f64>(),
        move |x, g| {
            for i in 0..x.len() {
                g[i] = d2[i] * (x[i] - c2[i]);
            }
        },
    )
    .with_hessian(diag_hessian(d))
}

fn clamp_solution(d: &[f64], c: &[f64], bounds: &Bounds) -> KnownSolution {
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let x: Vec<f64> = c.iter().enumerate().map(|(i, &c)| c.max(lo[i]).min(hi[i])).collect();
    let f = 0.5 * x.iter().zip(d).zip(c).map(|((x, d), c)| d * (x - c) * (x - c)).sum::<f64>();
    let active = (0..x.len()).filter(|&i| x[i] == lo[i] || x[i] == hi[i]).collect();
    KnownSolution { x, f, active }
}

fn quad_interior(n: usize) -> Result<(BoxProblem, Option<KnownSolution>)> {
    let d: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
    let c: Vec<f64> = (0..n).map(|i| 0.2 + 0.6 * (i as f64 + 0.5) / n as f64).collect();
    let bounds = Bounds::uniform(n, 0.0, 1.0)?;
    let sol = clamp_solution(&d, &c, &bounds);
    let start: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.95 } else { 0.05 }).collect();
    Ok((BoxProblem::new("quad-interior", diag_quadratic(d, c), bounds, start)?, Some(sol)))
}

/// Coordinates cycle through three patterns: `[0.5, inf)` with the
/// unconstrained minimizer at 0, free with minimizer 0, and `(-inf, 1]`
/// with minimizer 2. For `n = 2` this is `0.5 |x|^2` with `l = (0.5, -inf)`.
fn quad_active(n: usize) -> Result<(BoxProblem, Option<KnownSolution>)> {
    let d: Vec<f64> = (0..n).map(|i| 1.0 + (i / 2) as f64).collect();
    let mut lo = vec![-INF; n];
    let mut hi = vec![INF; n];
    let mut c = vec![0.0; n];
    for i in 0..n {
        match i % 3 {
            0 => lo[i] = 0.5,
            1 => {}
            _ => {
                hi[i] = 1.0;
                c[i] = 2.0;
            }
        }
    }
    let bounds = Bounds::new(lo, hi)?;
    let sol = clamp_solution(&d, &c, &bounds);
    Ok((BoxProblem::new("quad-active", diag_quadratic(d, c), bounds, vec![0.75; n])?, Some(sol)))
}

fn degenerate(n: usize) -> Result<(BoxProblem, Option<KnownSolution>)> {
    let obj = FnObjective::new(
        |x| 0.2 * x.iter().map(|v| v * v).sum::<f64>(),
        |x, g| {
            for i in 0..x.len() {
                g[i] = 0.4 * x[i];
            }
        },
    )
    .with_hessian(diag_hessian(vec![0.4; n]));
    let bounds = Bounds::new(vec![0.0; n], vec![INF; n])?;
    let sol = KnownSolution {
        x: vec![0.0; n],
        f: 0.0,
        active: (0..n).collect(),
    };
    Ok((BoxProblem::new("degenerate", obj, bounds, vec![1.0; n])?, Some(sol)))
}

/// Sum over pairs `(x_{2j}, x_{2j+1})` of `100 (b - a^2)^2 + (1 - a)^2`
/// with `a in [-2, 0.8]`, `b in [-2, 2]`. Each pair is solved by
/// `(0.8, 0.64)` with `a` at its upper bound.
fn rosenbrock(n: usize) -> Result<(BoxProblem, Option<KnownSolution>)> {
    if n % 2 != 0 {
        return Err(Error::InvalidParameter("extended Rosenbrock needs an even dimension".into()));
    }
    let obj = FnObjective::new(
        |x| {
            x.chunks(2)
                .map(|p| 100.0 * (p[1] - p[0] * p[0]).powi(2) + (1.0 - p[0]).powi(2))
                .sum()
        },
        |x, g| {
            for j in (0..x.len()).step_by(2) {
                let (a, b) = (x[j], x[j + 1]);
                let r = b - a * a;
                g[j] = -400.0 * a * r - 2.0 * (1.0 - a);
                g[j + 1] = 200.0 * r;
            }
        },
    )
    .with_hessian(|x| {
        let n = x.len();
        let mut h = vec![0.0; n * n];
        for j in (0..n).step_by(2) {
            let (a, b) = (x[j], x[j + 1]);
            h[j * n + j] = 1200.0 * a * a - 400.0 * b + 2.0;
            h[j * n + j + 1] = -400.0 * a;
            h[(j + 1) * n + j] = -400.0 * a;
            h[(j + 1) * n + j + 1] = 200.0;
        }
        h
    });
    let lo = vec![-2.0; n];
    let hi: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.8 } else { 2.0 }).collect();
    let bounds = Bounds::new(lo, hi)?;
    let start: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect();
    let x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.8 } else { 0.64 }).collect();
    let sol = KnownSolution {
        f: 0.04 * (n / 2) as f64,
        active: (0..n).step_by(2).collect(),
        x,
    };
    let name = if n == 2 { "rosenbrock-box" } else { "rosenbrock-ext" };
    Ok((BoxProblem::new(name, obj, bounds, start)?, Some(sol)))
}

fn linear_box(n: usize) -> Result<(BoxProblem, Option<KnownSolution>)> {
    let obj = FnObjective::new(|x| x.iter().sum(), |_, g| g.fill(1.0)).with_hessian(diag_hessian(vec![0.0; n]));
    let sol = KnownSolution {
        x: vec![0.0; n],
        f: 0.0,
        active: (0..n).collect(),
    };
    Ok((BoxProblem::new("linear-box", obj, Bounds::uniform(n, 0.0, 1.0)?, vec![0.5; n])?, Some(sol)))
}

fn quad_illcond(n: usize) -> Result<(BoxProblem, Option<KnownSolution>)> {
    let d: Vec<f64> = (0..n)
        .map(|i| if n == 1 { 1.0 } else { 10f64.powf(6.0 * i as f64 / (n - 1) as f64) })
        .collect();
    let pattern = [0.5, -0.8, 1.5, -1.5];
    let c: Vec<f64> = (0..n).map(|i| pattern[i % 4]).collect();
    let bounds = Bounds::uniform(n, -1.0, 1.0)?;
    let sol = clamp_solution(&d, &c, &bounds);
    let start: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { -0.9 } else { 0.9 }).collect();
    Ok((BoxProblem::new("quad-illcond", diag_quadratic(d, c), bounds, start)?, Some(sol)))
}

/// `sum x_i^4 / 4 - x_i^2 / 2 + x_i / 10` on `[-2, 2]^n`.
fn quartic_nonconvex(n: usize) -> Result<(BoxProblem, Option<KnownSolution>)> {
    let obj = FnObjective::new(
        |x| x.iter().map(|v| 0.25 * v.powi(4) - 0.5 * v * v + 0.1 * v).sum(),
        |x, g| {
            for i in 0..x.len() {
                g[i] = x[i].powi(3) - x[i] + 0.1;
            }
        },
    )
    .with_hessian(|x| {
        let n = x.len();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = 3.0 * x[i] * x[i] - 1.0;
        }
        h
    });
    let start: Vec<f64> = (0..n).map(|i| 0.05 * (i % 5) as f64 - 0.1).collect();
    Ok((BoxProblem::new("quartic-nonconvex", obj, Bounds::uniform(n, -2.0, 2.0)?, start)?, None))
}

/// Parameters `(a, rho, b, tau)` of bent-path instance `k`.
pub fn bent_path_parameters(k: usize) -> (f64, f64, f64, f64) {
    let a = 1.0 + (k % 4) as f64;
    let rho = 0.5 + 0.25 * (k % 3) as f64;
    let b = 1.0 + 0.5 * (k / 4) as f64;
    let tau = 0.25 * (k % 2) as f64;
    (a, rho, b, tau)
}

/// `f = a/2 (x2 - b)^2 + x1/2 + rho x1 (x2 - b) + x1^4/4 - tau x1^2`
/// on `x >= 0`. The solution `(0, b)` has `grad_1 f = 1/2`.
fn bent_path(k: usize) -> Result<(BoxProblem, Option<KnownSolution>)> {
    let (a, rho, b, tau) = bent_path_parameters(k);
    let obj = FnObjective::new(
        move |x| {
            let r = x[1] - b;
            0.5 * a * r * r + 0.5 * x[0] + rho * x[0] * r + 0.25 * x[0].powi(4) - tau * x[0] * x[0]
        },
        move |x, g| {
            let r = x[1] - b;
            g[0] = 0.5 + rho * r + x[0].powi(3) - 2.0 * tau * x[0];
            g[1] = a * r + rho * x[0];
        },
    )
    .with_hessian(move |x| vec![3.0 * x[0] * x[0] - 2.0 * tau, rho, rho, a]);
    let bounds = Bounds::new(vec![0.0; 2], vec![INF; 2])?;
    let start = vec![1.0 + 0.25 * (k % 3) as f64, 0.0];
    let sol = KnownSolution {
        x: vec![0.0, b],
        f: 0.0,
        active: vec![0],
    };
    Ok((BoxProblem::new(format!("bent-path-{k}"), obj, bounds, start)?, Some(sol)))
}

/// First-order stationarity: `||P_x(-grad f(x))||_inf <= tol`.
pub fn is_stationary(problem: &BoxProblem, x: &[f64], tol: f64) -> bool {
    let mut g = vec![0.0; x.len()];
    problem.objective().gradient(x, &mut g);
    problem.bounds().is_feasible(x) && projected_gradient_norm(x, &g, problem.bounds()) <= tol
}

/// Deterministic feasible sample points: `count` points spread through the
/// box (or around the start on unbounded sides), kept off the bounds.
pub fn sample_points(problem: &BoxProblem, count: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = (problem.bounds().lower(), problem.bounds().upper());
    let x0 = problem.start();
    let phi = 0.618_033_988_749_894_9;
    (0..count)
        .map(|k| {
            (0..problem.dim())
                .map(|i| {
                    let t = ((k + 1) as f64 * phi + (i + 1) as f64 * 0.754_877_666_246_692_7).fract();
                    let t = 0.05 + 0.9 * t;
                    match (lo[i].is_finite(), hi[i].is_finite()) {
                        (true, true) => lo[i] + t * (hi[i] - lo[i]),
                        (true, false) => lo[i] + 0.05 + 2.0 * t,
                        (false, true) => hi[i] - 0.05 - 2.0 * t,
                        (false, false) => x0[i] - 1.0 + 2.0 * t,
                    }
                })
                .collect()
        })
        .collect()
}

/// Largest discrepancies found by [`derivative_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    /// `max ||g - g_fd||_inf / (1 + ||g||_inf)` over the points.
    pub gradient: f64,
    /// Same measure for Hessian rows against differenced gradients.
    pub hessian: Option<f64>,
}

/// Compares analytic derivatives with central differences at the start
/// point and `samples` further points.
pub fn derivative_check(problem: &BoxProblem, samples: usize) -> DerivativeCheck {
    let mut points = vec![problem.start().to_vec()];
    points.extend(sample_points(problem, samples));
    let obj = problem.objective();
    let n = problem.dim();
    let mut grad_err: f64 = 0.0;
    let mut hess_err: Option<f64> = problem.has_hessian().then_some(0.0);
    for x in &points {
        let mut g = vec![0.0; n];
        obj.gradient(x, &mut g);
        let fd = finite_difference_gradient(problem, x, 1e-6);
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, worst_of);
        grad_err = worst_of(grad_err, diff / (1.0 + norm_inf(&g)));
        if let Some(err) = hess_err.as_mut() {
            let d = match obj.hessian(x) {
                Some(h) if h.len() == n * n => hessian_discrepancy(obj, x, &h),
                _ => f64::INFINITY,
            };
            *err = worst_of(*err, d);
        }
    }
    DerivativeCheck {
        gradient: grad_err,
        hessian: hess_err,
    }
}

/// `max` that reports a NaN discrepancy as infinite instead of dropping it.
fn worst_of(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else {
        a.max(b)
    }
}

fn hessian_discrepancy(obj: &dyn Objective, x: &[f64], h: &[f64]) -> f64 {
    let n = x.len();
    let step = 1e-6;
    let scale = 1.0 + norm_inf(h);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        let hj = step * (1.0 + x[j].abs());
        xp[j] += hj;
        xm[j] -= hj;
        let mut gp = vec![0.0; n];
        let mut gm = vec![0.0; n];
        obj.gradient(&xp, &mut gp);
        obj.gradient(&xm, &mut gm);
        for i in 0..n {
            let fd = (gp[i] - gm[i]) / (2.0 * hj);
            worst = worst_of(worst, (h[i * n + j] - fd).abs() / scale);
        }
    }
    worst
}
