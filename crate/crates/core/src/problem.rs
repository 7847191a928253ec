//! Problem definition: the feasible box, the objective oracle and evaluation
//! accounting.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower and upper bounds defining the feasible box `{x : lower <= x <= upper}`.
///
/// Infinite entries are allowed and mean "no bound on that side". Equal
/// entries describe a fixed variable, which is kept in the vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(Error::InvalidBounds {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The whole space: every bound infinite.
    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// The same interval `[lo, hi]` in every coordinate.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&lo, &hi))| lo <= xi && xi <= hi)
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// A smooth objective `f : R^n -> R` with its gradient and, optionally, its
/// Hessian.
///
/// Oracles must be pure: repeated calls at the same point return the same
/// values.
pub trait Objective: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64], grad: &mut [f64]);

    /// Dense row-major Hessian, or `None` when unavailable.
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn has_hessian(&self) -> bool {
        false
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type HessFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// An [`Objective`] assembled from closures.
pub struct FnObjective {
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
    hessian: Option<Box<HessFn>>,
}

impl FnObjective {
    pub fn new<F, G>(value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            value: Box::new(value),
            gradient: Box::new(gradient),
            hessian: None,
        }
    }

    pub fn with_hessian<H>(mut self, hessian: H) -> Self
    where
        H: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.hessian = Some(Box::new(hessian));
        self
    }
}

impl Objective for FnObjective {
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (self.gradient)(x, grad)
    }

    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.hessian.as_ref().map(|h| h(x))
    }

    fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }
}

/// A bound-constrained minimization problem.
#[derive(Clone)]
pub struct BoxProblem {
    name: String,
    objective: Arc<dyn Objective>,
    bounds: Bounds,
    start: Vec<f64>,
}

impl fmt::Debug for BoxProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoxProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("bounds", &self.bounds)
            .field("start", &self.start)
            .finish()
    }
}

impl BoxProblem {
    /// Builds a problem; the start point is clamped into the box.
    pub fn new(
        name: impl Into<String>,
        objective: impl Objective + 'static,
        bounds: Bounds,
        start: Vec<f64>,
    ) -> Result<Self> {
        Self::from_arc(name, Arc::new(objective), bounds, start)
    }

    pub fn from_arc(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        bounds: Bounds,
        start: Vec<f64>,
    ) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidParameter("problem dimension must be positive".into()));
        }
        bounds.check_dim(&start)?;
        let start = crate::path::project(&start, &bounds);
        Ok(Self {
            name: name.into(),
            objective,
            bounds,
            start,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn has_hessian(&self) -> bool {
        self.objective.has_hessian()
    }

    /// Same objective and bounds, different start point.
    pub fn with_start(&self, start: Vec<f64>) -> Result<Self> {
        Self::from_arc(self.name.clone(), self.objective.clone(), self.bounds.clone(), start)
    }
}

/// Oracle call counters for one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounter {
    pub n_f: usize,
    pub n_g: usize,
    pub n_h: usize,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evaluates `f(x)`, counting the call. Non-finite values are errors.
    pub fn value(&mut self, objective: &dyn Objective, x: &[f64]) -> Result<f64> {
        self.n_f += 1;
        let f = objective.value(x);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::NonFiniteValue)
        }
    }

    pub fn gradient(&mut self, objective: &dyn Objective, x: &[f64]) -> Result<Vec<f64>> {
        self.n_g += 1;
        let mut g = vec![0.0; x.len()];
        objective.gradient(x, &mut g);
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(Error::NonFiniteValue)
        }
    }

    pub fn hessian(&mut self, objective: &dyn Objective, x: &[f64]) -> Result<Vec<f64>> {
        let h = objective.hessian(x).ok_or(Error::MissingHessian)?;
        self.n_h += 1;
        if h.len() != x.len() * x.len() {
            return Err(Error::Dimension {
                expected: x.len() * x.len(),
                got: h.len(),
            });
        }
        Ok(h)
    }

    /// Componentwise difference `self - earlier`.
    pub fn since(&self, earlier: &EvalCounter) -> EvalCounter {
        EvalCounter {
            n_f: self.n_f - earlier.n_f,
            n_g: self.n_g - earlier.n_g,
            n_h: self.n_h - earlier.n_h,
        }
    }
}

/// Central-difference gradient, switching to a one-sided difference in any
/// coordinate where a probe would leave the box.
pub fn finite_difference_gradient(problem: &BoxProblem, x: &[f64], h: f64) -> Vec<f64> {
    let f = problem.objective();
    let lower = problem.bounds().lower();
    let upper = problem.bounds().upper();
    let mut probe = x.to_vec();
    let mut out = vec![0.0; x.len()];
    for i in 0..x.len() {
        let xi = x[i];
        let fwd_ok = xi + h <= upper[i];
        let bwd_ok = xi - h >= lower[i];
        out[i] = match (fwd_ok, bwd_ok) {
            (true, true) => {
                probe[i] = xi + h;
                let fp = f.value(&probe);
                probe[i] = xi - h;
                let fm = f.value(&probe);
                (fp - fm) / (2.0 * h)
            }
            (true, false) => {
                probe[i] = xi + h;
                let fp = f.value(&probe);
                probe[i] = xi;
                (fp - f.value(&probe)) / h
            }
            (false, true) => {
                probe[i] = xi - h;
                let fm = f.value(&probe);
                probe[i] = xi;
                (f.value(&probe) - fm) / h
            }
            // Box narrower than h: difference across the whole interval.
            (false, false) => {
                let (a, b) = (lower[i], upper[i]);
                if b > a {
                    probe[i] = b;
                    let fb = f.value(&probe);
                    probe[i] = a;
                    (fb - f.value(&probe)) / (b - a)
                } else {
                    0.0
                }
            }
        };
        probe[i] = xi;
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
