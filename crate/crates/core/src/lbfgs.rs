//! Limited-memory BFGS model restricted to a subspace of free coordinates.

use std::collections::VecDeque;

use crate::problem::{dot, norm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateResult {
    Applied,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Ring of the most recent `(s, y)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsMemory {
    m: usize,
    curvature_floor: f64,
    pairs: VecDeque<Pair>,
}

impl LbfgsMemory {
    pub const DEFAULT_MEMORY: usize = 8;
    pub const DEFAULT_FLOOR: f64 = 1e-8;

    /// `m = 0` gives scaled projected steepest descent.
    pub fn new(m: usize) -> Self {
        Self::with_floor(m, Self::DEFAULT_FLOOR)
    }

    pub fn with_floor(m: usize, curvature_floor: f64) -> Self {
        Self {
            m,
            curvature_floor,
            pairs: VecDeque::with_capacity(m),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.m
    }

    /// Stores the pair when `s^T y > floor * ||s|| * ||y||`.
    pub fn update(&mut self, s: &[f64], y: &[f64]) -> UpdateResult {
        let sy = dot(s, y);
        if !(sy > self.curvature_floor * norm2(s) * norm2(y)) || !sy.is_finite() {
            return UpdateResult::Skipped;
        }
        if self.m == 0 {
            return UpdateResult::Applied;
        }
        if self.pairs.len() == self.m {
            self.pairs.pop_front();
        }
        self.pairs.push_back(Pair {
            s: s.to_vec(),
            y: y.to_vec(),
            rho: 1.0 / sy,
        });
        UpdateResult::Applied
    }

    /// `s^T y / y^T y` of the newest pair, or 1 when empty.
    pub fn gamma_scale(&self) -> f64 {
        match self.pairs.back() {
            Some(p) => 1.0 / (p.rho * dot(&p.y, &p.y)),
            None => 1.0,
        }
    }

    /// Quasi-Newton direction on the free coordinates; masked coordinates
    /// are exactly zero.
    ///
    /// Every vector is restricted to the free set before each inner
    /// product. Pairs whose restricted curvature is not positive are left
    /// out, and if the result is not a descent direction the scaled
    /// negative free gradient is returned instead.
    pub fn reduced_direction(&self, grad: &[f64], free: &[bool]) -> Vec<f64> {
        let n = grad.len();
        let restrict = |v: &[f64]| -> Vec<f64> {
            v.iter().zip(free).map(|(&a, &f)| if f { a } else { 0.0 }).collect()
        };
        let g = restrict(grad);
        let gamma = self.gamma_scale();
        let gnorm = norm2(&g);
        if gnorm == 0.0 {
            return vec![0.0; n];
        }

        let reduced: Vec<(Vec<f64>, Vec<f64>, f64)> = self
            .pairs
            .iter()
            .filter_map(|p| {
                let s = restrict(&p.s);
                let y = restrict(&p.y);
                let sy = dot(&s, &y);
                (sy > 0.0).then(|| (s, y, 1.0 / sy))
            })
            .collect();

        let mut q = g.clone();
        let mut a = vec![0.0; reduced.len()];
        for (k, (s, y, rho)) in reduced.iter().enumerate().rev() {
            a[k] = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a[k] * yi;
            }
        }
        let mut r: Vec<f64> = q.iter().map(|v| gamma * v).collect();
        for (k, (s, y, rho)) in reduced.iter().enumerate() {
            let b = rho * dot(y, &r);
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += (a[k] - b) * si;
            }
        }
        let mut d: Vec<f64> = r.iter().map(|v| -v).collect();

        let gd = dot(&g, &d);
        if !(gd < -1e-12 * gnorm * norm2(&d)) {
            d = g.iter().map(|v| -gamma * v).collect();
        }
        for (di, &f) in d.iter_mut().zip(free) {
            if !f {
                *di = 0.0;
            }
        }
        d
    }
}

impl Default for LbfgsMemory {
    fn default() -> Self {
        Self::new(Self::DEFAULT_MEMORY)
    }
}
