//! Gradient evaluation and optimality measures.
//!
//! A feasible point is optimal exactly when `eta_min(x) >= eta_max(x)`, where
//!
//! ```text
//!   eta_min(x) = min_i { g_i + (2 min{sgn(x_i), 0} + 1) lambda }
//!   eta_max(x) = max_i { g_i + (2 max{sgn(x_i), 0} - 1) lambda }
//! ```
//!
//! with `g = grad of the smooth term`. The gap `eta_max - eta_min` is the
//! violation measure used for termination. Equivalently there must be a
//! multiplier `mu` with
//!
//! ```text
//!   g_i - mu = lambda   (x_i < 0),   g_i - mu = -lambda  (x_i > 0),
//!   |g_i - mu| <= lambda             (x_i = 0),
//! ```
//!
//! and at nonzero points that multiplier is recovered by the weighted
//! average implemented in [`multiplier`]. `sgn(0) = 0` throughout.

use crate::error::Error;
use crate::matrix::{self, DenseMatrix};
use crate::problem::Problem;
use crate::scalar::Scalar;

/// Stationarity bounds at a point, with the indices attaining them.
#[derive(Debug, Clone, Copy)]
pub struct EtaBounds<F> {
    pub eta_min: F,
    pub eta_max: F,
    /// `eta_max - eta_min`; nonpositive exactly at optimal points.
    pub gap: F,
    pub arg_min_idx: usize,
    pub arg_max_idx: usize,
}

impl<F: Scalar> EtaBounds<F> {
    /// Scale for the relative stopping test: `1 + |eta_min| + |eta_max|`.
    #[inline]
    pub fn scale(&self) -> F {
        F::one() + self.eta_min.abs() + self.eta_max.abs()
    }

    #[inline]
    pub fn converged(&self, eps: F) -> bool {
        self.gap <= eps * self.scale()
    }
}

/// Multiplier candidate and the worst residual of the three-case system.
#[derive(Debug, Clone, Copy)]
pub struct KktReport<F> {
    pub mu: F,
    pub max_violation: F,
}

/// `grad_i of the smooth term = (A^i)' r`, O(m).
#[inline]
pub fn partial_derivative<F: Scalar>(problem: &Problem<F>, r: &[F], i: usize) -> F {
    matrix::dot(problem.column(i), r)
}

/// `A' r`, componentwise identical to [`partial_derivative`] (same
/// sequential reduction order), O(mn).
pub fn full_gradient<F: Scalar>(problem: &Problem<F>, r: &[F]) -> Vec<F> {
    problem.matrix().tr_mul_vec(r)
}

/// Per-index terms of the two stationarity bounds.
#[inline]
fn eta_terms<F: Scalar>(x_i: F, g_i: F, lambda: F) -> (F, F) {
    let min_term = if x_i < F::zero() {
        g_i - lambda
    } else {
        g_i + lambda
    };
    let max_term = if x_i > F::zero() {
        g_i + lambda
    } else {
        g_i - lambda
    };
    (min_term, max_term)
}

fn eta_bounds_impl<F: Scalar>(
    x: &[F],
    grad: &[F],
    lambda: F,
    skip: Option<&[bool]>,
) -> EtaBounds<F> {
    debug_assert_eq!(x.len(), grad.len());
    let mut eta_min = F::infinity();
    let mut eta_max = F::neg_infinity();
    let mut arg_min_idx = 0;
    let mut arg_max_idx = 0;
    for i in 0..x.len() {
        if skip.is_some_and(|s| s[i]) {
            continue;
        }
        let (lo, hi) = eta_terms(x[i], grad[i], lambda);
        // Strict comparisons break ties toward the lowest index.
        if lo < eta_min {
            eta_min = lo;
            arg_min_idx = i;
        }
        if hi > eta_max {
            eta_max = hi;
            arg_max_idx = i;
        }
    }
    EtaBounds {
        eta_min,
        eta_max,
        gap: eta_max - eta_min,
        arg_min_idx,
        arg_max_idx,
    }
}

/// Stationarity bounds over all indices.
pub fn eta_bounds<F: Scalar>(x: &[F], grad: &[F], lambda: F) -> EtaBounds<F> {
    eta_bounds_impl(x, grad, lambda, None)
}

/// Stationarity bounds over the variables still in the problem.
pub fn eta_bounds_excluding<F: Scalar>(
    x: &[F],
    grad: &[F],
    lambda: F,
    removed: &[bool],
) -> EtaBounds<F> {
    eta_bounds_impl(x, grad, lambda, Some(removed))
}

/// Weighted multiplier estimate at a nonzero point:
///
/// ```text
///   mu(x) = sum_i |x_i|^p (g_i + lambda sgn(x_i)) / sum_i |x_i|^p
/// ```
///
/// Terms with `x_i = 0` contribute nothing; `x = 0` is an error.
pub fn multiplier<F: Scalar>(x: &[F], grad: &[F], lambda: F, p_exp: F) -> Result<F, Error> {
    debug_assert_eq!(x.len(), grad.len());
    let mut num = F::zero();
    let mut den = F::zero();
    for (&xi, &gi) in x.iter().zip(grad) {
        if xi != F::zero() {
            let w = if p_exp == F::one() {
                xi.abs()
            } else {
                xi.abs().powf(p_exp)
            };
            num += w * (gi + lambda * xi.signum());
            den += w;
        }
    }
    if den == F::zero() {
        return Err(Error::ZeroPoint);
    }
    Ok(num / den)
}

/// Worst residual of the three-case optimality system for a candidate `mu`.
pub fn kkt_check<F: Scalar>(x: &[F], grad: &[F], lambda: F, mu: F) -> KktReport<F> {
    debug_assert_eq!(x.len(), grad.len());
    let mut worst = F::zero();
    for (&xi, &gi) in x.iter().zip(grad) {
        let v = if xi < F::zero() {
            (gi - mu - lambda).abs()
        } else if xi > F::zero() {
            (gi - mu + lambda).abs()
        } else {
            ((gi - mu).abs() - lambda).max(F::zero())
        };
        worst = worst.max(v);
    }
    KktReport {
        mu,
        max_violation: worst,
    }
}

/// Smallest weight for which `x = 0` is optimal:
/// `(max_j [A'y]_j - min_i [A'y]_i) / 2`.
pub fn lambda_max<F: Scalar>(a: &DenseMatrix<F>, y: &[F]) -> F {
    let g = a.tr_mul_vec(y);
    let mut lo = F::infinity();
    let mut hi = F::neg_infinity();
    for &v in &g {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (hi - lo) / F::cast(2.0)
}
