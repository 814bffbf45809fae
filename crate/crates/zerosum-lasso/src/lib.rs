//! Lasso solving under the zero-sum constraint `e'x = 0`.
//!
//! The library solves
//!
//! ```text
//!     minimize   1/2 ||A x - y||^2 + lambda ||x||_1
//!     subject to sum_i x_i = 0
//! ```
//!
//! the formulation used for log-contrast regression on compositional data,
//! where `A = log(Z)` and the constraint makes predictions insensitive to
//! per-sample rescaling of the composition.
//!
//! The solver is an active-set 2-coordinate descent method: it estimates
//! the zero variables of the optimum, then alternates between an accurate
//! full-gradient iteration (stepping the maximal violating pair) and a
//! cheap almost-cyclic sweep of the remaining variables against a fixed
//! anchor coordinate, with every step an exact univariate minimization in
//! closed form.
//!
//! Everything is generic over the scalar type ([`Scalar`], implemented for
//! `f32`/`f64`); the `*64`/`*32` aliases below pin the common choices.
//!
//! Module map:
//! * [`problem`]: problem/state containers, objective bookkeeping
//! * [`optimality`]: gradients, stationarity bounds, multiplier, `lambda_max`
//! * [`line_search`]: exact minimization along `e_i - e_j`
//! * [`solver`]: the two-strategy outer loop
//! * [`oracle`]: slow independent references used by tests
//! * [`data`]: CSV I/O, log/centering transforms, synthetic generator
//! * [`path`]: lambda grids and warm-started path solves

pub mod data;
pub mod error;
pub mod line_search;
pub mod matrix;
pub mod optimality;
pub mod oracle;
pub mod path;
pub mod problem;
pub mod scalar;
pub mod solver;

pub use error::Error;
pub use matrix::DenseMatrix;
pub use problem::{Problem, SolverConfig, SolverResult, SolverState, SolverStatus, Strategy};
pub use scalar::Scalar;
pub use solver::{solve, solve_warm};

/// Double-precision aliases (the default choice).
pub type Problem64 = Problem<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverResult64 = SolverResult<f64>;
pub type DenseMatrix64 = DenseMatrix<f64>;
pub type Dataset64 = data::Dataset<f64>;

/// Single-precision aliases.
pub type Problem32 = Problem<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type SolverResult32 = SolverResult<f32>;
pub type DenseMatrix32 = DenseMatrix<f32>;
pub type Dataset32 = data::Dataset<f32>;
