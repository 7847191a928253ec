//! Dense `L D L^T` factorization used as a positive-definiteness test.

use crate::error::{Error, Result};

const SHIFT_CAP: f64 = 1e40;

/// Unit lower-triangular `L` (row-major, strict lower part used) and
/// diagonal `D` with `A = L D L^T`.
#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    /// Factors the symmetric row-major `a`. Returns `None` unless every
    /// pivot is positive and finite.
    pub fn factor(a: &[f64], n: usize) -> Option<Self> {
        let mut l = vec![0.0; n * n];
        let mut d = vec![0.0; n];
        for j in 0..n {
            let mut dj = a[j * n + j];
            for k in 0..j {
                dj -= l[j * n + k] * l[j * n + k] * d[k];
            }
            if !(dj > 0.0 && dj.is_finite()) {
                return None;
            }
            d[j] = dj;
            l[j * n + j] = 1.0;
            for i in j + 1..n {
                let mut v = a[i * n + j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k] * d[k];
                }
                l[i * n + j] = v / dj;
            }
        }
        Some(Self { n, l, d })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
        }
        y
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.d
    }
}

/// Factors `h + delta I` for the smallest `delta` in the sequence
/// `0, max(1e-8 ||h||_inf, 1e-8), then x10` that gives a positive-definite
/// matrix.
pub fn factor_with_shift(h: &[f64], n: usize) -> Result<(Ldl, f64)> {
    if let Some(f) = Ldl::factor(h, n) {
        return Ok((f, 0.0));
    }
    let norm = (0..n)
        .map(|i| h[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut delta = (1e-8 * norm).max(1e-8);
    let mut shifted = h.to_vec();
    while delta <= SHIFT_CAP {
        for i in 0..n {
            shifted[i * n + i] = h[i * n + i] + delta;
        }
        if let Some(f) = Ldl::factor(&shifted, n) {
            return Ok((f, delta));
        }
        delta *= 10.0;
    }
    Err(Error::Factorization { delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let f = Ldl::factor(&a, 3).unwrap();
        let x = f.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(Ldl::factor(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
        assert!(Ldl::factor(&[0.0], 1).is_none());
    }

    #[test]
    fn shift_makes_matrix_definite() {
        let h = [-1.0, 0.0, 0.0, 2.0];
        let (f, delta) = factor_with_shift(&h, 2).unwrap();
        assert!(delta > 1.0);
        assert!(f.diagonal().iter().all(|d| *d > 0.0));
        let (_, delta) = factor_with_shift(&[2.0, 0.0, 0.0, 2.0], 2).unwrap();
        assert_eq!(delta, 0.0);
    }
}
