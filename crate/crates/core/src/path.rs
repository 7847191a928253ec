//! The projected search path `x(alpha) = proj(x + alpha p)` and the
//! restriction `psi(alpha) = f(x(alpha))` with its one-sided derivatives.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::problem::{dot, Bounds, EvalCounter, Objective};

/// Quotients above this are treated as "never reached".
const KINK_CAP: f64 = 1e300;

/// Componentwise clamp of `x` into the box.
pub fn project(x: &[f64], bounds: &Bounds) -> Vec<f64> {
    x.iter()
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .map(|(&xi, (&lo, &hi))| {
            if xi < lo {
                lo
            } else if xi > hi {
                hi
            } else {
                xi
            }
        })
        .collect()
}

/// `P_x(p)`: zero the components of `p` that point out of the box at an
/// active bound.
pub fn projected_direction(x: &[f64], p: &[f64], bounds: &Bounds) -> Vec<f64> {
    x.iter()
        .zip(p)
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .map(|((&xi, &pi), (&lo, &hi))| {
            if (xi == lo && pi < 0.0) || (xi == hi && pi > 0.0) {
                0.0
            } else {
                pi
            }
        })
        .collect()
}

/// A step at which coordinate `index` of `x + alpha p` reaches its blocking
/// bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kink {
    pub step: f64,
    pub index: usize,
}

impl Eq for Kink {}

impl Ord for Kink {
    fn cmp(&self, other: &Self) -> Ordering {
        self.step
            .total_cmp(&other.step)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Kink {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn coordinate_kink(xi: f64, pi: f64, lo: f64, hi: f64) -> f64 {
    let k = if pi > 0.0 {
        (hi - xi) / pi
    } else if pi < 0.0 {
        (lo - xi) / pi
    } else {
        f64::INFINITY
    };
    if k.is_finite() && k <= KINK_CAP {
        k
    } else {
        f64::INFINITY
    }
}

/// Finite positive kink steps sorted ascending (heap sort), ties broken by
/// coordinate. Coordinates already sitting on their blocking bound are left
/// out.
pub fn kink_steps(x: &[f64], p: &[f64], bounds: &Bounds) -> Vec<Kink> {
    let heap: BinaryHeap<Kink> = x
        .iter()
        .zip(p)
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .enumerate()
        .filter_map(|(index, ((&xi, &pi), (&lo, &hi)))| {
            let step = coordinate_kink(xi, pi, lo, hi);
            (step.is_finite() && step > 0.0).then_some(Kink { step, index })
        })
        .collect();
    heap.into_sorted_vec()
}

/// Base point, direction and box of one projected search, with the kink
/// structure precomputed.
#[derive(Debug, Clone)]
pub struct SearchPath {
    base: Vec<f64>,
    direction: Vec<f64>,
    bounds: Bounds,
    /// Per-coordinate kink step (infinite when the coordinate never binds).
    steps: Vec<f64>,
    kinks: Vec<Kink>,
}

impl SearchPath {
    pub fn new(base: Vec<f64>, direction: Vec<f64>, bounds: Bounds) -> Result<Self> {
        bounds.check_dim(&base)?;
        bounds.check_dim(&direction)?;
        if !bounds.is_feasible(&base) {
            return Err(Error::InvalidParameter("search path base point is infeasible".into()));
        }
        let kinks = kink_steps(&base, &direction, &bounds);
        let mut steps = vec![f64::INFINITY; base.len()];
        for k in &kinks {
            steps[k.index] = k.step;
        }
        Ok(Self {
            base,
            direction,
            bounds,
            steps,
            kinks,
        })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn kinks(&self) -> &[Kink] {
        &self.kinks
    }

    /// `x(alpha)`. Coordinates past their kink sit exactly on the bound so
    /// that the path and the kink list never disagree.
    pub fn point(&self, alpha: f64) -> Vec<f64> {
        let lo = self.bounds.lower();
        let hi = self.bounds.upper();
        (0..self.base.len())
            .map(|i| {
                let pi = self.direction[i];
                if alpha >= self.steps[i] {
                    if pi > 0.0 {
                        hi[i]
                    } else {
                        lo[i]
                    }
                } else {
                    (self.base[i] + alpha * pi).clamp(lo[i], hi[i])
                }
            })
            .collect()
    }

    /// Exact (bitwise) membership in the kink list.
    pub fn is_kink(&self, alpha: f64) -> bool {
        let at = self.kinks.partition_point(|k| k.step < alpha);
        at < self.kinks.len() && self.kinks[at].step == alpha
    }

    /// Coordinates whose kink step is exactly `alpha`.
    pub fn kinks_at(&self, alpha: f64) -> impl Iterator<Item = usize> + '_ {
        let start = self.kinks.partition_point(|k| k.step < alpha);
        self.kinks[start..]
            .iter()
            .take_while(move |k| k.step == alpha)
            .map(|k| k.index)
    }

    /// Kinks strictly inside the open interval between `a` and `b`.
    pub fn kinks_between(&self, a: f64, b: f64) -> &[Kink] {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let start = self.kinks.partition_point(|k| k.step <= lo);
        let end = self.kinks.partition_point(|k| k.step < hi);
        if start < end {
            &self.kinks[start..end]
        } else {
            &[]
        }
    }

    /// `P_{x(alpha)}(p)`, the right derivative of the path.
    pub fn projected_direction_at(&self, alpha: f64) -> Vec<f64> {
        projected_direction(&self.point(alpha), &self.direction, &self.bounds)
    }

    /// `P^-_{x(alpha)}(p)`, the left derivative of the path: like `P` but
    /// restoring `p_i` in every coordinate that kinks exactly at `alpha`.
    pub fn projected_direction_minus(&self, alpha: f64) -> Vec<f64> {
        let mut d = self.projected_direction_at(alpha);
        for i in self.kinks_at(alpha) {
            d[i] = self.direction[i];
        }
        d
    }
}

/// `psi` and its one-sided derivatives at one step along a [`SearchPath`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub psi: f64,
    pub grad: Vec<f64>,
    pub dpsi_plus: f64,
    /// Absent at `alpha = 0`.
    pub dpsi_minus: Option<f64>,
    pub is_kink: bool,
}

impl PathPoint {
    /// The `alpha = 0` point built from values the caller already holds.
    pub fn at_base(path: &SearchPath, f: f64, grad: Vec<f64>) -> Self {
        let d = projected_direction(path.base(), path.direction(), path.bounds());
        Self {
            alpha: 0.0,
            x: path.base().to_vec(),
            psi: f,
            dpsi_plus: dot(&grad, &d),
            grad,
            dpsi_minus: None,
            is_kink: false,
        }
    }

    /// Left derivative, falling back to the right one at `alpha = 0`.
    pub fn dpsi_left(&self) -> f64 {
        self.dpsi_minus.unwrap_or(self.dpsi_plus)
    }
}

pub(crate) fn tag_alpha(err: Error, alpha: f64) -> Error {
    match err {
        Error::NonFiniteValue => Error::Evaluation { alpha },
        other => other,
    }
}

/// Evaluates `psi(alpha)`, `psi'_+(alpha)` and (for `alpha > 0`)
/// `psi'_-(alpha)` with one objective call and one gradient call.
pub fn eval_path(
    path: &SearchPath,
    alpha: f64,
    objective: &dyn Objective,
    counter: &mut EvalCounter,
) -> Result<PathPoint> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative step {alpha}")));
    }
    let x = path.point(alpha);
    let psi = counter.value(objective, &x).map_err(|e| tag_alpha(e, alpha))?;
    let grad = counter.gradient(objective, &x).map_err(|e| tag_alpha(e, alpha))?;
    Ok(complete_point(path, alpha, x, psi, grad))
}

/// Builds the derivative data for a point whose value and gradient are known.
pub(crate) fn complete_point(
    path: &SearchPath,
    alpha: f64,
    x: Vec<f64>,
    psi: f64,
    grad: Vec<f64>,
) -> PathPoint {
    let plus = projected_direction(&x, path.direction(), path.bounds());
    let dpsi_plus = dot(&grad, &plus);
    let is_kink = alpha > 0.0 && path.is_kink(alpha);
    let dpsi_minus = if alpha == 0.0 {
        None
    } else if is_kink {
        let mut minus = plus;
        for i in path.kinks_at(alpha) {
            minus[i] = path.direction()[i];
        }
        Some(dot(&grad, &minus))
    } else {
        Some(dpsi_plus)
    };
    PathPoint {
        alpha,
        x,
        psi,
        grad,
        dpsi_plus,
        dpsi_minus,
        is_kink,
    }
}
