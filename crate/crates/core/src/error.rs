use thiserror::Error;

/// Errors raised by problem construction, oracles and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid bounds at index {index}: lower {lower} > upper {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("objective returned a non-finite value")]
    NonFiniteValue,

    #[error("objective evaluation failed at step {alpha}")]
    Evaluation { alpha: f64 },

    #[error("merit function undefined: {0}")]
    Domain(String),

    #[error("factorization failed: diagonal shift {delta:e} exceeded the cap")]
    Factorization { delta: f64 },

    #[error("problem does not provide a Hessian")]
    MissingHessian,

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("performance profile: {0}")]
    Profile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
