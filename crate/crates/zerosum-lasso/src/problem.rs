//! Problem and solver-state containers shared by every other module.
//!
//! The problem is
//!
//! ```text
//!     minimize   f(x) = 1/2 ||A x - y||^2 + lambda ||x||_1
//!     subject to e' x = 0
//! ```
//!
//! with a dense `m x n` design matrix `A`. The zero-sum constraint is
//! enforced structurally: every update moves along `e_i - e_j`, so the
//! constraint is never renormalized, only audited.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::matrix::{self, DenseMatrix};
use crate::scalar::Scalar;

/// Immutable problem data: design matrix, response, regularization weight.
///
/// Shareable across threads; all solver state lives in [`SolverState`].
#[derive(Debug, Clone)]
pub struct Problem<F> {
    a: DenseMatrix<F>,
    y: Vec<F>,
    lambda: F,
    col_sq_norms: Vec<F>,
}

impl<F: Scalar> Problem<F> {
    /// Validates and builds a problem instance.
    pub fn new(a: DenseMatrix<F>, y: Vec<F>, lambda: F) -> Result<Self, Error> {
        if a.nrows() != y.len() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                rows: a.nrows(),
                cols: a.ncols(),
                y_len: y.len(),
            });
        }
        if a.ncols() < 2 {
            return Err(Error::TooFewVariables { n: a.ncols() });
        }
        if a.values().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "design matrix",
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "response" });
        }
        if !lambda.is_finite() {
            return Err(Error::NonFinite {
                what: "regularization weight",
            });
        }
        if lambda < F::zero() {
            return Err(Error::NegativeLambda {
                value: lambda.to_f64().unwrap_or(f64::NAN),
            });
        }
        let col_sq_norms = a.columns().map(matrix::norm2_sq).collect();
        Ok(Self {
            a,
            y,
            lambda,
            col_sq_norms,
        })
    }

    /// Same data with a different regularization weight.
    pub fn with_lambda(&self, lambda: F) -> Result<Self, Error> {
        let mut p = self.clone();
        if !lambda.is_finite() {
            return Err(Error::NonFinite {
                what: "regularization weight",
            });
        }
        if lambda < F::zero() {
            return Err(Error::NegativeLambda {
                value: lambda.to_f64().unwrap_or(f64::NAN),
            });
        }
        p.lambda = lambda;
        Ok(p)
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.a.nrows()
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.a.ncols()
    }

    #[inline]
    pub fn lambda(&self) -> F {
        self.lambda
    }

    #[inline]
    pub fn matrix(&self) -> &DenseMatrix<F> {
        &self.a
    }

    #[inline]
    pub fn response(&self) -> &[F] {
        &self.y
    }

    /// Column `A^j` as a contiguous slice, O(m).
    #[inline]
    pub fn column(&self, j: usize) -> &[F] {
        self.a.column(j)
    }

    /// `||A^j||^2`, precomputed at construction.
    #[inline]
    pub fn col_sq_norm(&self, j: usize) -> F {
        self.col_sq_norms[j]
    }

    /// Residual `A x - y` recomputed from scratch, O(mn).
    pub fn residual(&self, x: &[F]) -> Vec<F> {
        let mut r = self.a.mul_vec(x);
        for (ri, &yi) in r.iter_mut().zip(&self.y) {
            *ri -= yi;
        }
        r
    }

    /// Objective `1/2 ||r||^2 + lambda ||x||_1` for a caller-supplied
    /// residual `r = A x - y`.
    pub fn objective(&self, x: &[F], r: &[F]) -> F {
        F::cast(0.5) * matrix::norm2_sq(r) + self.lambda * matrix::norm1(x)
    }
}

/// Which of the two update strategies an outer iteration used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Full-gradient iteration stepping the maximal violating pair.
    Mvp,
    /// Almost-cyclic 2-coordinate descent sweep against a fixed anchor.
    Ac2cd,
}

/// Solver parameters. `Default` gives the values used throughout the tests.
#[derive(Debug, Clone)]
pub struct SolverConfig<F> {
    /// Exponent of the multiplier weighting function, > 0.
    pub p_exp: F,
    /// Anchor eligibility threshold in (0, 1]; with 1 the anchor is the
    /// max-magnitude coordinate.
    pub tau: F,
    /// Initial progress threshold for switching to the full-gradient step.
    pub theta_init: F,
    /// Floor of the progress threshold schedule.
    pub theta_min: F,
    /// Geometric decay applied to theta each time a full-gradient
    /// iteration runs, in (0, 1).
    pub theta_decay: F,
    /// Relative optimality tolerance on the stationarity gap.
    pub eps_opt: F,
    pub max_outer_iters: usize,
    /// Seed for the sweep-permutation generator.
    pub seed: u64,
    /// Audit bound on `|e'x|` relative to `1 + ||x||_1`.
    pub feas_tol: F,
    /// Audit bound on residual drift relative to `1 + ||y||_inf`.
    pub resid_tol: F,
    /// Recompute the residual from scratch every this many outer iterations.
    pub audit_every: usize,
    /// Eliminate bitwise-identical columns up front instead of lazily.
    pub dedup_preprocess: bool,
}

impl<F: Scalar> Default for SolverConfig<F> {
    fn default() -> Self {
        Self {
            p_exp: F::one(),
            tau: F::one(),
            theta_init: F::cast(1e-2),
            theta_min: F::cast(1e-6),
            theta_decay: F::cast(0.5),
            eps_opt: F::cast(1e-6),
            max_outer_iters: 1_000_000,
            seed: 0,
            feas_tol: F::cast(1e-10),
            resid_tol: F::cast(1e-8),
            audit_every: 50,
            dedup_preprocess: false,
        }
    }
}

impl<F: Scalar> SolverConfig<F> {
    // Negated comparisons so that NaN parameters fail validation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.p_exp > F::zero()) {
            return Err(Error::InvalidConfig("p_exp must be > 0"));
        }
        if !(self.tau > F::zero() && self.tau <= F::one()) {
            return Err(Error::InvalidConfig("tau must be in (0, 1]"));
        }
        if !(self.theta_init > F::zero() && self.theta_init <= F::one()) {
            return Err(Error::InvalidConfig("theta_init must be in (0, 1]"));
        }
        if !(self.theta_min > F::zero() && self.theta_min <= self.theta_init) {
            return Err(Error::InvalidConfig("need 0 < theta_min <= theta_init"));
        }
        if !(self.theta_decay > F::zero() && self.theta_decay < F::one()) {
            return Err(Error::InvalidConfig("theta_decay must be in (0, 1)"));
        }
        if !(self.eps_opt > F::zero()) {
            return Err(Error::InvalidConfig("eps_opt must be > 0"));
        }
        if !(self.feas_tol > F::zero()) || !(self.resid_tol > F::zero()) {
            return Err(Error::InvalidConfig("audit tolerances must be > 0"));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::InvalidConfig("max_outer_iters must be >= 1"));
        }
        if self.audit_every == 0 {
            return Err(Error::InvalidConfig("audit_every must be >= 1"));
        }
        Ok(())
    }
}

/// Mutable iterate: current point, cached residual and objective, the
/// stationarity proxy `pi`, and the removed-variable mask.
///
/// Single-owner; may move between threads but is never shared.
#[derive(Debug, Clone)]
pub struct SolverState<F> {
    pub x: Vec<F>,
    /// Cached residual `A x - y`, maintained incrementally.
    pub r: Vec<F>,
    /// Cached objective value, maintained from line-search values.
    pub f: F,
    /// Stationarity proxy: gradient shifted by the multiplier estimate at
    /// the last full-gradient iteration.
    pub pi: Vec<F>,
    pub theta: F,
    pub last_strategy: Option<Strategy>,
    /// `removed[i]` pins `x_i = 0` forever (duplicate-column elimination).
    pub removed: Vec<bool>,
    pub(crate) rng: ChaCha8Rng,
}

impl<F: Scalar> SolverState<F> {
    /// Fresh state at `x = 0`: `r = -y`, `f = 1/2 ||y||^2`.
    pub fn new(problem: &Problem<F>, config: &SolverConfig<F>) -> Self {
        let n = problem.n_features();
        let r: Vec<F> = problem.response().iter().map(|&v| -v).collect();
        let f = F::cast(0.5) * matrix::norm2_sq(&r);
        Self {
            x: vec![F::zero(); n],
            r,
            f,
            pi: vec![F::zero(); n],
            theta: config.theta_init,
            last_strategy: None,
            removed: vec![false; n],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        }
    }

    /// State at a caller-supplied feasible point (warm start).
    pub fn warm(problem: &Problem<F>, config: &SolverConfig<F>, x0: &[F]) -> Result<Self, Error> {
        if x0.len() != problem.n_features() {
            return Err(Error::DimensionMismatch {
                rows: problem.n_samples(),
                cols: problem.n_features(),
                y_len: x0.len(),
            });
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "warm-start point",
            });
        }
        let s = matrix::sum(x0);
        if s.abs() > config.feas_tol * (F::one() + matrix::norm1(x0)) {
            return Err(Error::InfeasibleStart {
                sum: s.to_f64().unwrap_or(f64::NAN),
            });
        }
        let r = problem.residual(x0);
        let f = problem.objective(x0, &r);
        Ok(Self {
            x: x0.to_vec(),
            r,
            f,
            pi: vec![F::zero(); problem.n_features()],
            theta: config.theta_init,
            last_strategy: None,
            removed: vec![false; problem.n_features()],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        })
    }

    /// Recomputes `r` and `f` from scratch and returns the sup-norm drift of
    /// the incrementally maintained residual.
    pub fn refresh_residual(&mut self, problem: &Problem<F>) -> F {
        let exact = problem.residual(&self.x);
        let mut drift = F::zero();
        for (&cached, &fresh) in self.r.iter().zip(&exact) {
            drift = drift.max((cached - fresh).abs());
        }
        self.r = exact;
        self.f = problem.objective(&self.x, &self.r);
        drift
    }

    /// `|e'x|`, the audited feasibility defect.
    pub fn zero_sum_abs(&self) -> F {
        matrix::sum(&self.x).abs()
    }

    pub fn nnz(&self) -> usize {
        self.x.iter().filter(|v| **v != F::zero()).count()
    }
}

/// Final report of a solve run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct SolverResult<F> {
    pub x_star: Vec<F>,
    pub objective: F,
    /// Stationarity gap at the final full-gradient check (nonpositive means
    /// the optimality conditions hold exactly).
    pub gap: F,
    /// Scale the relative stopping test used: `1 + |eta_min| + |eta_max|`.
    pub gap_scale: F,
    pub outer_iters: usize,
    pub mvp_iters: usize,
    pub ac2cd_inner_steps: usize,
    /// Variables fixed to zero by duplicate-column elimination.
    pub removed: Vec<usize>,
    pub status: SolverStatus,
}

impl<F: Scalar> SolverResult<F> {
    pub fn nnz(&self) -> usize {
        self.x_star.iter().filter(|v| **v != F::zero()).count()
    }
}
