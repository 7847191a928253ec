//! Primal-dual barrier merit function and its gradient.

use std::sync::Mutex;

use super::PrimalDualPoint;
use crate::error::{Error, Result};
use crate::problem::{BoxProblem, Bounds, Objective};

/// Which coordinates move and which sides carry a barrier term.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layout {
    /// Indices with `lower < upper`.
    pub free: Vec<usize>,
    pub has_lo: Vec<bool>,
    pub has_hi: Vec<bool>,
}

impl Layout {
    pub fn new(bounds: &Bounds) -> Self {
        let (lo, hi) = (bounds.lower(), bounds.upper());
        let n = bounds.len();
        let free: Vec<usize> = (0..n).filter(|&i| lo[i] < hi[i]).collect();
        let mut has_lo = vec![false; n];
        let mut has_hi = vec![false; n];
        for &i in &free {
            has_lo[i] = lo[i].is_finite();
            has_hi[i] = hi[i].is_finite();
        }
        Self { free, has_lo, has_hi }
    }

    pub fn nv(&self) -> usize {
        3 * self.free.len()
    }

    /// `v = (x_F, z1_F, z2_F)`.
    pub fn pack(&self, p: &PrimalDualPoint) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.nv());
        v.extend(self.free.iter().map(|&i| p.x[i]));
        v.extend(self.free.iter().map(|&i| p.z1[i]));
        v.extend(self.free.iter().map(|&i| p.z2[i]));
        v
    }

    /// Writes `v` into a copy of `template`.
    pub fn unpack(&self, v: &[f64], template: &PrimalDualPoint) -> PrimalDualPoint {
        let m = self.free.len();
        let mut p = template.clone();
        for (k, &i) in self.free.iter().enumerate() {
            p.x[i] = v[k];
            p.z1[i] = v[m + k];
            p.z2[i] = v[2 * m + k];
        }
        p
    }

    pub fn pack_parts(&self, x: &[f64], z1: &[f64], z2: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.nv());
        v.extend(self.free.iter().map(|&i| x[i]));
        v.extend(self.free.iter().map(|&i| z1[i]));
        v.extend(self.free.iter().map(|&i| z2[i]));
        v
    }
}

/// `M - f`: the barrier and penalty terms.
pub(crate) fn barrier_value(p: &PrimalDualPoint, bounds: &Bounds, layout: &Layout) -> Result<f64> {
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let mu = p.mu;
    let mut total = 0.0;
    for &i in &layout.free {
        if layout.has_lo[i] {
            let s = p.x[i] - lo[i];
            let w = p.z1[i] * s;
            if !(s > 0.0 && w > 0.0) {
                return Err(Error::Domain(format!("lower slack or dual not positive at {i}")));
            }
            total -= mu * s.ln() + mu * w.ln() - w;
        }
        if layout.has_hi[i] {
            let s = hi[i] - p.x[i];
            let w = p.z2[i] * s;
            if !(s > 0.0 && w > 0.0) {
                return Err(Error::Domain(format!("upper slack or dual not positive at {i}")));
            }
            total -= mu * s.ln() + mu * w.ln() - w;
        }
    }
    Ok(total)
}

/// Components of the merit gradient, full length `n` each.
#[derive(Debug, Clone, PartialEq)]
pub struct MeritGradient {
    pub value: f64,
    pub gx: Vec<f64>,
    pub gz1: Vec<f64>,
    pub gz2: Vec<f64>,
    /// `-(grad f - mu / (x - l) + mu / (u - x))`.
    pub newton_rhs: Vec<f64>,
}

pub(crate) fn merit_gradient_with(
    p: &PrimalDualPoint,
    f: f64,
    grad_f: &[f64],
    bounds: &Bounds,
    layout: &Layout,
) -> Result<MeritGradient> {
    let value = f + barrier_value(p, bounds, layout)?;
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let n = grad_f.len();
    let mu = p.mu;
    let mut gx = vec![0.0; n];
    let mut gz1 = vec![0.0; n];
    let mut gz2 = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for &i in &layout.free {
        let mut g = grad_f[i];
        let mut r = grad_f[i];
        if layout.has_lo[i] {
            let s = p.x[i] - lo[i];
            g += -2.0 * mu / s + p.z1[i];
            r -= mu / s;
            gz1[i] = s - mu / p.z1[i];
        }
        if layout.has_hi[i] {
            let s = hi[i] - p.x[i];
            g += 2.0 * mu / s - p.z2[i];
            r += mu / s;
            gz2[i] = s - mu / p.z2[i];
        }
        gx[i] = g;
        rhs[i] = -r;
    }
    Ok(MeritGradient {
        value,
        gx,
        gz1,
        gz2,
        newton_rhs: rhs,
    })
}

/// `M(x, z1, z2; mu)`, summing barrier terms only over finite bounds.
pub fn merit(point: &PrimalDualPoint, problem: &BoxProblem) -> Result<f64> {
    let layout = Layout::new(problem.bounds());
    let b = barrier_value(point, problem.bounds(), &layout)?;
    Ok(problem.objective().value(&point.x) + b)
}

pub fn merit_gradient(point: &PrimalDualPoint, problem: &BoxProblem) -> Result<MeritGradient> {
    let layout = Layout::new(problem.bounds());
    let obj = problem.objective();
    let mut g = vec![0.0; point.x.len()];
    obj.gradient(&point.x, &mut g);
    merit_gradient_with(point, obj.value(&point.x), &g, problem.bounds(), &layout)
}

/// The merit function as an [`Objective`] over the packed vector
/// `v = (x_F, z1_F, z2_F)`, so the path machinery can search on it.
///
/// Remembers the most recent `f` and gradient evaluations so the solver
/// can reuse them at an accepted point.
pub(crate) struct MeritObjective<'a> {
    pub problem: &'a BoxProblem,
    pub layout: &'a Layout,
    pub template: PrimalDualPoint,
    pub last_f: Mutex<Option<(Vec<f64>, f64)>>,
    pub last_grad: Mutex<Option<(Vec<f64>, Vec<f64>)>>,
}

impl<'a> MeritObjective<'a> {
    pub fn new(problem: &'a BoxProblem, layout: &'a Layout, template: PrimalDualPoint) -> Self {
        Self {
            problem,
            layout,
            template,
            last_f: Mutex::new(None),
            last_grad: Mutex::new(None),
        }
    }

    pub fn cached_f(&self, x: &[f64]) -> Option<f64> {
        let guard = self.last_f.lock().unwrap();
        guard.as_ref().filter(|(cx, _)| cx.as_slice() == x).map(|(_, f)| *f)
    }

    pub fn cached_grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        let guard = self.last_grad.lock().unwrap();
        guard.as_ref().filter(|(cx, _)| cx.as_slice() == x).map(|(_, g)| g.clone())
    }
}

impl Objective for MeritObjective<'_> {
    fn value(&self, v: &[f64]) -> f64 {
        let p = self.layout.unpack(v, &self.template);
        let f = self.problem.objective().value(&p.x);
        *self.last_f.lock().unwrap() = Some((p.x.clone(), f));
        match barrier_value(&p, self.problem.bounds(), self.layout) {
            Ok(b) => f + b,
            Err(_) => f64::NAN,
        }
    }

    fn gradient(&self, v: &[f64], out: &mut [f64]) {
        let p = self.layout.unpack(v, &self.template);
        let mut gf = vec![0.0; p.x.len()];
        self.problem.objective().gradient(&p.x, &mut gf);
        *self.last_grad.lock().unwrap() = Some((p.x.clone(), gf.clone()));
        match merit_gradient_with(&p, 0.0, &gf, self.problem.bounds(), self.layout) {
            Ok(mg) => out.copy_from_slice(&self.layout.pack_parts(&mg.gx, &mg.gz1, &mg.gz2)),
            Err(_) => out.fill(f64::NAN),
        }
    }
}
