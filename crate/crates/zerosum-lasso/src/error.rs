use thiserror::Error;

/// Errors produced by problem construction and the solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("design matrix is {rows}x{cols} but the response has length {y_len}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        y_len: usize,
    },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("regularization weight must be nonnegative, got {value}")]
    NegativeLambda { value: f64 },
    #[error("the zero-sum constraint needs at least two variables, got {n}")]
    TooFewVariables { n: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("starting point violates the zero-sum constraint (sum = {sum})")]
    InfeasibleStart { sum: f64 },
    #[error("multiplier function is undefined at x = 0")]
    ZeroPoint,
    #[error("nonactive index set is empty")]
    EmptyNonactive,
    #[error("no anchor index available: x = 0")]
    NoEligibleIndex,
    #[error("objective is not strictly convex along the ({i}, {j}) direction; columns are duplicates")]
    NonConvexDirection { i: usize, j: usize },
    #[error("reference solve did not converge within {sweeps} sweeps")]
    NotConverged { sweeps: usize },
}
