//! Projected-search methods for minimizing a smooth function subject to
//! simple bounds `lower <= x <= upper`.
//!
//! The building blocks are the projected path `x(alpha) = proj(x + alpha p)`
//! ([`path`]), searches along it ([`linesearch`]), an active-set L-BFGS
//! solver ([`active_set`]), a primal-dual interior method ([`interior`]),
//! a catalog of test problems ([`problems`]) and a benchmark harness
//! ([`bench`], [`cli`]).

pub mod active_set;
pub mod bench;
pub mod cli;
pub mod error;
pub mod interior;
pub mod lbfgs;
pub mod linesearch;
pub mod path;
pub mod problem;
pub mod problems;
pub mod termination;

pub use error::{Error, Result};
pub use path::{eval_path, kink_steps, project, projected_direction, Kink, PathPoint, SearchPath};
pub use problem::{finite_difference_gradient, BoxProblem, Bounds, EvalCounter, FnObjective, Objective};
pub use termination::{check_termination, projected_gradient_norm, SolverReport, SolverStatus, Termination};
