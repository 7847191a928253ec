//! Step acceptance along a search path: quasi-Armijo backtracking, the
//! two-stage quasi-Wolfe search and the classical Wolfe search.

mod armijo;
mod interp;
mod quasi_wolfe;
mod wolfe;

use std::fmt;

pub use armijo::quasi_armijo;
pub use quasi_wolfe::quasi_wolfe;
pub use wolfe::{wolfe, ScalarPoint};

use crate::error::{Error, Result};
use crate::path::PathPoint;
use crate::problem::EvalCounter;

/// Constants shared by every search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub eta_a: f64,
    pub eta_w: f64,
    /// Stage-one expansion factor.
    pub gamma_e: f64,
    /// Backtracking contraction factor.
    pub sigma_back: f64,
    pub alpha_max: f64,
    pub alpha_init: f64,
    /// Trial evaluations allowed per search (the base point is free).
    pub max_evals: usize,
    pub max_consecutive_kinks: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            eta_a: 1e-4,
            eta_w: 0.9,
            gamma_e: 2.0,
            sigma_back: 0.5,
            alpha_max: 1e8,
            alpha_init: 1.0,
            max_evals: 60,
            max_consecutive_kinks: 3,
        }
    }
}

impl SearchParams {
    /// Defaults for backtracking: a larger sufficient-decrease constant.
    pub fn quasi_armijo() -> Self {
        Self {
            eta_a: 0.3,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.eta_a > 0.0 && self.eta_a < self.eta_w && self.eta_w < 1.0) {
            return bad("need 0 < eta_a < eta_w < 1");
        }
        if !(self.gamma_e > 1.0) {
            return bad("gamma_e must exceed 1");
        }
        if !(self.sigma_back > 0.0 && self.sigma_back < 1.0) {
            return bad("sigma_back must lie in (0, 1)");
        }
        if !(self.alpha_init > 0.0 && self.alpha_init <= self.alpha_max) {
            return bad("need 0 < alpha_init <= alpha_max");
        }
        if self.max_evals == 0 {
            return bad("max_evals must be positive");
        }
        Ok(())
    }
}

/// Which of the four quasi-Wolfe conditions hold at a step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CFlags {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
}

impl CFlags {
    pub fn is_quasi_wolfe(&self) -> bool {
        self.c1 && (self.c2 || self.c3 || self.c4)
    }
}

impl fmt::Display for CFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.c1, "C1"), (self.c2, "C2"), (self.c3, "C3"), (self.c4, "C4")]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| *n)
            .collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// The auxiliary function `omega` and its one-sided slopes at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxOmega {
    pub value: f64,
    pub d_plus: f64,
    pub d_minus: Option<f64>,
}

impl AuxOmega {
    pub fn at(point: &PathPoint, base: &PathPoint, eta_a: f64) -> Self {
        let slope = eta_a * base.dpsi_plus;
        Self {
            value: point.psi - (base.psi + point.alpha * slope),
            d_plus: point.dpsi_plus - slope,
            d_minus: point.dpsi_minus.map(|d| d - slope),
        }
    }

    pub(crate) fn d_left(&self) -> f64 {
        self.d_minus.unwrap_or(self.d_plus)
    }
}

/// Evaluates C1 to C4 at `point` relative to the `alpha = 0` point `base`.
pub fn is_quasi_wolfe(point: &PathPoint, base: &PathPoint, params: &SearchParams) -> CFlags {
    let d0 = base.dpsi_plus;
    let curv = params.eta_w * d0.abs();
    let left = point.dpsi_left();
    CFlags {
        c1: point.psi <= base.psi + point.alpha * (params.eta_a * d0),
        c2: left.abs() <= curv,
        c3: point.dpsi_plus.abs() <= curv,
        c4: point.is_kink && left <= 0.0 && 0.0 <= point.dpsi_plus,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    QuasiWolfe,
    Wolfe,
    Armijo,
    /// Stage one reached `alpha_max` without finding a bracket.
    HitAlphaMax,
    Failure,
}

/// How a trial step was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialKind {
    StageOne,
    Backtrack,
    Kink,
    Bisection,
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub alpha: f64,
    pub kind: TrialKind,
}

/// Result of one search. `P` is [`PathPoint`] for path searches and
/// [`ScalarPoint`] for the classical Wolfe search.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome<P = PathPoint> {
    pub alpha: f64,
    pub point: P,
    pub status: SearchStatus,
    pub flags: CFlags,
    /// Oracle calls made by the search.
    pub evals: EvalCounter,
    pub trials: Vec<Trial>,
    /// `(alpha_low, alpha_high)` at every stage-two iteration.
    pub brackets: Vec<(f64, f64)>,
}

impl<P> LineSearchOutcome<P> {
    pub fn is_success(&self) -> bool {
        matches!(
            self.status,
            SearchStatus::QuasiWolfe | SearchStatus::Wolfe | SearchStatus::Armijo | SearchStatus::HitAlphaMax
        )
    }
}
