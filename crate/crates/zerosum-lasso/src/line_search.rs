//! Exact minimization of the objective along `+-(e_i - e_j)`.
//!
//! Restricted to that line through a feasible point `xb`, the objective is a
//! univariate piecewise quadratic in `u = xb_i + xi`:
//!
//! ```text
//!   f_ij(u) = 1/2 alpha u^2 - beta u + lambda (|u| + |u - s|) + c
//! ```
//!
//! with `alpha = ||A^i - A^j||^2`, `beta = alpha xb_i - g_i + g_j`,
//! `s = xb_i + xb_j`, and `c` fixed so that `f_ij(xb_i) = f(xb)`. For
//! `alpha > 0` the minimizer is unique and found by a four-branch case
//! analysis; `alpha = 0` means the two columns coincide and the variable
//! `x_i` can be removed from the problem outright.

use crate::error::Error;
use crate::problem::{Problem, SolverState};
use crate::scalar::Scalar;

/// Coefficients of the restricted objective along one coordinate pair.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseQuadratic<F> {
    /// Curvature `||A^i - A^j||^2 >= 0`.
    pub alpha: F,
    pub beta: F,
    /// Second breakpoint `xb_i + xb_j` (the first is always 0).
    pub s: F,
    /// Constant term pinned so the value at `u = xb_i` equals `f(xb)`.
    pub c: F,
}

impl<F: Scalar> PiecewiseQuadratic<F> {
    /// Value of the restricted objective at `u`.
    #[inline]
    pub fn value(&self, u: F, lambda: F) -> F {
        F::cast(0.5) * self.alpha * u * u - self.beta * u
            + lambda * (u.abs() + (u - self.s).abs())
            + self.c
    }

    /// Assembles the coefficients from a precomputed curvature and the two
    /// partial derivatives (see [`direction_coefficients`] for the one-stop
    /// version that also measures the curvature).
    #[inline]
    pub fn from_parts(
        alpha: F,
        x_i: F,
        x_j: F,
        grad_i: F,
        grad_j: F,
        lambda: F,
        f_at_x: F,
    ) -> Self {
        let beta = alpha * x_i - grad_i + grad_j;
        let s = x_i + x_j;
        // f_ij(x_i) = f(x) fixes c; |x_i - s| = |x_j|.
        let c = f_at_x
            - (F::cast(0.5) * alpha * x_i * x_i - beta * x_i
                + lambda * (x_i.abs() + x_j.abs()));
        Self { alpha, beta, s, c }
    }
}

/// Single fused pass over the pair's columns and the residual: both partial
/// derivatives of the smooth term plus the direction curvature
/// `||A^i - A^j||^2`. Each accumulator sees the exact operation sequence of
/// its standalone counterpart.
#[inline]
pub fn pair_stats<F: Scalar>(col_i: &[F], col_j: &[F], r: &[F]) -> (F, F, F) {
    debug_assert_eq!(col_i.len(), r.len());
    debug_assert_eq!(col_j.len(), r.len());
    let mut g_i = F::zero();
    let mut g_j = F::zero();
    let mut alpha = F::zero();
    for ((&a, &b), &rh) in col_i.iter().zip(col_j).zip(r) {
        g_i += a * rh;
        g_j += b * rh;
        let d = a - b;
        alpha += d * d;
    }
    (g_i, g_j, alpha)
}

/// Extracts `(alpha, beta, s, c)` for the pair `(i, j)` at the current point.
///
/// `grad_i`/`grad_j` are the two partial derivatives of the smooth term at
/// `x` and `f_at_x` the objective there; `alpha` costs one O(m) pass over
/// the two columns.
pub fn direction_coefficients<F: Scalar>(
    problem: &Problem<F>,
    x: &[F],
    f_at_x: F,
    grad_i: F,
    grad_j: F,
    i: usize,
    j: usize,
) -> PiecewiseQuadratic<F> {
    assert_ne!(i, j, "direction needs two distinct coordinates");
    let mut alpha = F::zero();
    for (&a, &b) in problem.column(i).iter().zip(problem.column(j)) {
        let d = a - b;
        alpha += d * d;
    }
    PiecewiseQuadratic::from_parts(alpha, x[i], x[j], grad_i, grad_j, problem.lambda(), f_at_x)
}

/// Duplicate-column test on the curvature: `alpha` vanishing relative to the
/// two column norms means the columns are (numerically) identical.
#[inline]
pub fn is_duplicate_pair<F: Scalar>(alpha: F, col_i_sq_norm: F, col_j_sq_norm: F) -> bool {
    alpha <= F::cast(1e-24) * (col_i_sq_norm + col_j_sq_norm)
}

/// Unique minimizer of the strictly convex restricted objective.
///
/// Tries the three stationary-point candidates of the smooth pieces in
/// order, then falls back to comparing the two breakpoints; value ties go
/// to `u = 0` to promote sparsity.
pub fn minimize_univariate<F: Scalar>(
    q: &PiecewiseQuadratic<F>,
    lambda: F,
) -> Result<F, Error> {
    if q.alpha <= F::zero() {
        return Err(Error::NonConvexDirection { i: 0, j: 0 });
    }
    let two = F::cast(2.0);
    let s = q.s;

    let u = (q.beta - two * lambda) / q.alpha;
    if u > s.max(F::zero()) {
        return Ok(u);
    }
    let u = (q.beta + two * lambda) / q.alpha;
    if u < s.min(F::zero()) {
        return Ok(u);
    }
    let u = q.beta / q.alpha;
    if u * (u - s) < F::zero() {
        return Ok(u);
    }

    // No stationary point in the interior of any piece: the minimizer is a
    // breakpoint.
    if q.value(F::zero(), lambda) <= q.value(s, lambda) {
        Ok(F::zero())
    } else {
        Ok(s)
    }
}

/// Applies the exact step for the pair `(i, j)`: `x_i` moves to `u_star`,
/// `x_j` picks up the slack so the pair sum stays at `q.s`, the residual is
/// updated incrementally and `f` is taken from the line-search value.
#[allow(clippy::too_many_arguments)]
pub fn apply_step<F: Scalar>(
    state: &mut SolverState<F>,
    lambda: F,
    i: usize,
    j: usize,
    u_star: F,
    q: &PiecewiseQuadratic<F>,
    col_i: &[F],
    col_j: &[F],
) {
    let xi = u_star - state.x[i];
    if xi == F::zero() {
        return;
    }
    for ((r, &a), &b) in state.r.iter_mut().zip(col_i).zip(col_j) {
        *r += xi * (a - b);
    }
    state.x[i] = u_star;
    // Closed form from the constraint rather than incremental subtraction,
    // so the pair sum cannot drift.
    state.x[j] = q.s - u_star;
    state.f = q.value(u_star, lambda);
}

/// Removes variable `i` when `A^i = A^j`: its mass moves onto `j`, which
/// leaves `A x` (hence the residual) untouched and can only shrink the
/// l1 norm.
pub fn eliminate_duplicate<F: Scalar>(state: &mut SolverState<F>, lambda: F, i: usize, j: usize) {
    let xi = state.x[i];
    let xj = state.x[j];
    let merged = xi + xj;
    state.f += lambda * (merged.abs() - xi.abs() - xj.abs());
    state.x[j] = merged;
    state.x[i] = F::zero();
    state.removed[i] = true;
}
