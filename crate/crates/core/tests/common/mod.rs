//! Randomized instances and independent reference computations shared by
//! the integration tests. Nothing here calls into the path machinery.

#![allow(dead_code)]

use projsearch_core::{Bounds, FnObjective};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Kink of one coordinate from the textbook formula, `None` when the
/// coordinate never reaches a bound or is already blocked.
pub fn oracle_kink(x: f64, p: f64, lo: f64, hi: f64) -> Option<f64> {
    let t = if p > 0.0 && hi.is_finite() {
        (hi - x) / p
    } else if p < 0.0 && lo.is_finite() {
        (lo - x) / p
    } else {
        return None;
    };
    (t > 0.0 && t <= 1e300).then_some(t)
}

/// `proj(x + alpha p)` with coordinates past their kink placed exactly on
/// the bound.
pub fn oracle_point(x: &[f64], p: &[f64], b: &Bounds, alpha: f64) -> Vec<f64> {
    let (lo, hi) = (b.lower(), b.upper());
    (0..x.len())
        .map(|i| {
            if let Some(k) = oracle_kink(x[i], p[i], lo[i], hi[i]) {
                if alpha >= k {
                    return if p[i] > 0.0 { hi[i] } else { lo[i] };
                }
            }
            (x[i] + alpha * p[i]).clamp(lo[i], hi[i])
        })
        .collect()
}

/// Whether coordinate `i` is moving just before (`left`) or just after
/// `alpha` along the path.
fn moving(x: f64, p: f64, lo: f64, hi: f64, alpha: f64, left: bool) -> bool {
    if p == 0.0 || (p < 0.0 && x <= lo) || (p > 0.0 && x >= hi) {
        return false;
    }
    match oracle_kink(x, p, lo, hi) {
        None => true,
        Some(k) => {
            if left {
                alpha <= k
            } else {
                alpha < k
            }
        }
    }
}

/// One-sided path derivatives `(left, right)` at `alpha` given the
/// gradient at `x(alpha)`.
pub fn oracle_slopes(x: &[f64], p: &[f64], b: &Bounds, alpha: f64, grad: &[f64]) -> (f64, f64) {
    let (lo, hi) = (b.lower(), b.upper());
    let mut left = 0.0;
    let mut right = 0.0;
    for i in 0..x.len() {
        if moving(x[i], p[i], lo[i], hi[i], alpha, true) {
            left += grad[i] * p[i];
        }
        if moving(x[i], p[i], lo[i], hi[i], alpha, false) {
            right += grad[i] * p[i];
        }
    }
    (left, right)
}

pub fn oracle_is_kink(x: &[f64], p: &[f64], b: &Bounds, alpha: f64) -> bool {
    (0..x.len()).any(|i| oracle_kink(x[i], p[i], b.lower()[i], b.upper()[i]) == Some(alpha))
}

/// A random box with roughly `inf_prob` of the sides infinite.
pub fn random_bounds(r: &mut TestRng, n: usize, inf_prob: f64) -> Bounds {
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for _ in 0..n {
        let a = r.gen_range(-3.0..1.0);
        let w = r.gen_range(0.2..4.0);
        lo.push(if r.gen_bool(inf_prob) { f64::NEG_INFINITY } else { a });
        hi.push(if r.gen_bool(inf_prob) { f64::INFINITY } else { a + w });
    }
    Bounds::new(lo, hi).unwrap()
}

/// A feasible point with about `at_bound` of the coordinates on a bound.
pub fn random_point(r: &mut TestRng, b: &Bounds, at_bound: f64) -> Vec<f64> {
    let (lo, hi) = (b.lower(), b.upper());
    (0..b.len())
        .map(|i| {
            if r.gen_bool(at_bound) {
                if lo[i].is_finite() && (r.gen_bool(0.5) || !hi[i].is_finite()) {
                    return lo[i];
                }
                if hi[i].is_finite() {
                    return hi[i];
                }
            }
            let a = if lo[i].is_finite() { lo[i] } else { hi[i].min(0.0) - 3.0 };
            let c = if hi[i].is_finite() { hi[i] } else { a.max(lo[i]) + 4.0 };
            r.gen_range(a..=c)
        })
        .collect()
}

/// Random smooth test objectives with closed-form gradients.
#[derive(Debug, Clone)]
pub enum Model {
    /// `0.5 sum d_i (x_i - c_i)^2`
    DiagQuad { d: Vec<f64>, c: Vec<f64> },
    /// `sum a_i (x_i - c_i)^4 + b_i (x_i - c_i)^2`, with `b_i` possibly negative.
    Quartic { a: Vec<f64>, b: Vec<f64>, c: Vec<f64> },
    /// `0.5 (x - c)^T H (x - c)` with a dense symmetric positive definite `H`.
    DenseQuad { h: Vec<f64>, c: Vec<f64> },
}

impl Model {
    pub fn random_diag(r: &mut TestRng, n: usize) -> Self {
        Model::DiagQuad {
            d: (0..n).map(|_| 10f64.powf(r.gen_range(-1.0..2.0))).collect(),
            c: (0..n).map(|_| r.gen_range(-4.0..4.0)).collect(),
        }
    }

    pub fn random_quartic(r: &mut TestRng, n: usize, convex: bool) -> Self {
        Model::Quartic {
            a: (0..n).map(|_| r.gen_range(0.05..2.0)).collect(),
            b: (0..n)
                .map(|_| if convex { r.gen_range(0.0..2.0) } else { r.gen_range(-2.0..2.0) })
                .collect(),
            c: (0..n).map(|_| r.gen_range(-3.0..3.0)).collect(),
        }
    }

    pub fn random_dense(r: &mut TestRng, n: usize) -> Self {
        let m: Vec<f64> = (0..n * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = (0..n).map(|k| m[k * n + i] * m[k * n + j]).sum::<f64>();
            }
            h[i * n + i] += 0.1;
        }
        Model::DenseQuad {
            h,
            c: (0..n).map(|_| r.gen_range(-4.0..4.0)).collect(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Model::DiagQuad { d, c } => 0.5 * (0..x.len()).map(|i| d[i] * (x[i] - c[i]).powi(2)).sum::<f64>(),
            Model::Quartic { a, b, c } => (0..x.len())
                .map(|i| {
                    let t = x[i] - c[i];
                    a[i] * t.powi(4) + b[i] * t * t
                })
                .sum(),
            Model::DenseQuad { h, c } => {
                let n = x.len();
                let t: Vec<f64> = (0..n).map(|i| x[i] - c[i]).collect();
                0.5 * (0..n)
                    .map(|i| t[i] * (0..n).map(|j| h[i * n + j] * t[j]).sum::<f64>())
                    .sum::<f64>()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Model::DiagQuad { d, c } => (0..x.len()).map(|i| d[i] * (x[i] - c[i])).collect(),
            Model::Quartic { a, b, c } => (0..x.len())
                .map(|i| {
                    let t = x[i] - c[i];
                    4.0 * a[i] * t.powi(3) + 2.0 * b[i] * t
                })
                .collect(),
            Model::DenseQuad { h, c } => {
                let n = x.len();
                (0..n)
                    .map(|i| (0..n).map(|j| h[i * n + j] * (x[j] - c[j])).sum())
                    .collect()
            }
        }
    }

    pub fn objective(&self) -> FnObjective {
        let (m1, m2) = (self.clone(), self.clone());
        FnObjective::new(move |x| m1.value(x), move |x, g| g.copy_from_slice(&m2.gradient(x)))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A direction whose right derivative at `alpha = 0` is negative: the
/// negative gradient plus noise, retried until it descends.
pub fn random_descent(r: &mut TestRng, x: &[f64], b: &Bounds, grad: &[f64]) -> Option<Vec<f64>> {
    for _ in 0..20 {
        let p: Vec<f64> = grad
            .iter()
            .map(|g| -g * r.gen_range(0.2..2.0) + r.gen_range(-1.0..1.0))
            .collect();
        let (_, right) = oracle_slopes(x, &p, b, 0.0, grad);
        if right < 0.0 {
            return Some(p);
        }
    }
    None
}
