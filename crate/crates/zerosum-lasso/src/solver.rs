//! The two-strategy decomposition solver.
//!
//! Starting from `x = 0`, one guaranteed-descent step is taken, then the
//! outer loop alternates between two kinds of iterations:
//!
//! * **MVP**: compute the full gradient, the multiplier estimate and the
//!   stationarity proxy `pi`, estimate the active set, step the maximal
//!   violating pair exactly, and test global optimality. Expensive (O(mn))
//!   but accurate.
//! * **AC2CD**: keep the previous `pi`, fix a large-magnitude anchor
//!   coordinate, and sweep the nonactive set in random order, pairing each
//!   index with the anchor. Only partial derivatives (O(m) each) are needed.
//!
//! MVP runs when the previous iteration made insufficient progress and the
//! previous iteration was not itself MVP, so the loop settles into strict
//! alternation. Global optimality is only ever tested where a full gradient
//! exists: at the start and at MVP iterations.

use crate::error::Error;
use crate::line_search::{
    apply_step, direction_coefficients, eliminate_duplicate, is_duplicate_pair,
    minimize_univariate, pair_stats, PiecewiseQuadratic,
};
use crate::matrix;
use crate::optimality::{eta_bounds_excluding, full_gradient, multiplier, EtaBounds};
use crate::problem::{Problem, SolverConfig, SolverResult, SolverState, SolverStatus, Strategy};
use crate::scalar::Scalar;
use rand::seq::SliceRandom;

/// Active/nonactive split of the variable indices.
///
/// `active` holds the indices estimated to be zero at the optimum: exactly
/// those with `x_i = 0` and `|pi_i| <= lambda`. Removed variables appear in
/// neither list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivePartition {
    pub active: Vec<usize>,
    pub nonactive: Vec<usize>,
}

/// Events reported to a solve monitor; used by tests to audit descent,
/// feasibility and strategy alternation.
#[derive(Debug, Clone, Copy)]
pub enum SolveEvent<F> {
    /// An exact 2-coordinate step was applied (init, MVP or inner AC2CD).
    Step { f: F },
    /// An outer iteration finished.
    Outer {
        k: usize,
        strategy: Strategy,
        f_before: F,
        f_after: F,
        zero_sum_abs: F,
        norm1: F,
    },
    /// Periodic or final residual audit.
    Audit { drift: F },
    /// A duplicate-column variable was fixed to zero.
    Eliminated { index: usize },
}

/// Outcome of [`initialize`].
#[derive(Debug, Clone)]
pub struct Initialization<F> {
    pub state: SolverState<F>,
    /// Stationarity bounds at the all-zero start point.
    pub bounds_at_zero: EtaBounds<F>,
    /// Whether `x = 0` already passes the stopping test (`lambda >=
    /// lambda_max` up to tolerance); if so no step was taken.
    pub optimal: bool,
}

pub fn estimate_active_set<F: Scalar>(
    x: &[F],
    pi: &[F],
    lambda: F,
    removed: &[bool],
) -> ActivePartition {
    let mut active = Vec::new();
    let mut nonactive = Vec::new();
    for i in 0..x.len() {
        if removed[i] {
            continue;
        }
        if x[i] == F::zero() && pi[i].abs() <= lambda {
            active.push(i);
        } else {
            nonactive.push(i);
        }
    }
    ActivePartition { active, nonactive }
}

/// Maximal violating pair over `nonactive`: the indices attaining the two
/// stationarity bounds restricted to that set, ties to the lowest index.
/// Also returns the restricted gap (max score minus min score).
pub fn mvp_pair<F: Scalar>(
    x: &[F],
    grad: &[F],
    lambda: F,
    nonactive: &[usize],
) -> Result<(usize, usize, F), Error> {
    if nonactive.is_empty() {
        return Err(Error::EmptyNonactive);
    }
    let mut min_score = F::infinity();
    let mut max_score = F::neg_infinity();
    let mut i_hat = nonactive[0];
    let mut j_hat = nonactive[0];
    for &i in nonactive {
        let lo = if x[i] < F::zero() {
            grad[i] - lambda
        } else {
            grad[i] + lambda
        };
        let hi = if x[i] > F::zero() {
            grad[i] + lambda
        } else {
            grad[i] - lambda
        };
        if lo < min_score {
            min_score = lo;
            i_hat = i;
        }
        if hi > max_score {
            max_score = hi;
            j_hat = i;
        }
    }
    Ok((i_hat, j_hat, max_score - min_score))
}

/// Anchor index for an AC2CD sweep: the max-magnitude coordinate of the
/// nonactive set (lowest index on ties), which meets the `tau` eligibility
/// threshold for any `tau <= 1`. Fails when `x = 0`.
pub fn select_anchor<F: Scalar>(x: &[F], nonactive: &[usize], tau: F) -> Result<usize, Error> {
    let mut best: Option<(usize, F)> = None;
    for &i in nonactive {
        let m = x[i].abs();
        match best {
            Some((_, bm)) if bm >= m => {}
            _ => best = Some((i, m)),
        }
    }
    match best {
        Some((i, m)) if m > F::zero() => {
            debug_assert!(m >= tau * matrix::norm_inf(x));
            Ok(i)
        }
        _ => Err(Error::NoEligibleIndex),
    }
}

/// Strategy rule: MVP exactly when the previous iteration made no
/// sufficient progress *and* was not itself MVP.
pub fn select_strategy<F: Scalar>(
    f_prev: F,
    f_cur: F,
    theta: F,
    last: Option<Strategy>,
) -> Strategy {
    let insufficient = f_prev - f_cur <= theta * f_prev.max(F::one());
    if insufficient && last != Some(Strategy::Mvp) {
        Strategy::Mvp
    } else {
        Strategy::Ac2cd
    }
}

/// Start point and guaranteed first descent step.
///
/// At `x = 0` the multiplier estimate is undefined, so the stationarity
/// proxy is the bare gradient and the first pair is taken over all
/// remaining indices (any constant shift drops out of the arg-min/arg-max).
/// If the zero point already passes the stopping test the state is returned
/// untouched.
pub fn initialize<F: Scalar>(
    problem: &Problem<F>,
    config: &SolverConfig<F>,
) -> Result<Initialization<F>, Error> {
    initialize_impl(problem, config, &mut |_| {})
}

fn initialize_impl<F: Scalar, M: FnMut(SolveEvent<F>)>(
    problem: &Problem<F>,
    config: &SolverConfig<F>,
    monitor: &mut M,
) -> Result<Initialization<F>, Error> {
    config.validate()?;
    let lambda = problem.lambda();
    let mut state = SolverState::new(problem, config);
    if config.dedup_preprocess {
        for idx in dedup_scan(problem) {
            state.removed[idx] = true;
            monitor(SolveEvent::Eliminated { index: idx });
        }
    }

    let grad = full_gradient(problem, &state.r);
    state.pi.copy_from_slice(&grad);

    loop {
        let bounds = eta_bounds_excluding(&state.x, &grad, lambda, &state.removed);
        if bounds.converged(config.eps_opt) {
            return Ok(Initialization {
                state,
                bounds_at_zero: bounds,
                optimal: true,
            });
        }
        let all: Vec<usize> = (0..state.x.len()).filter(|&i| !state.removed[i]).collect();
        let (i, j, _) = mvp_pair(&state.x, &grad, lambda, &all)?;
        debug_assert_ne!(i, j, "positive gap implies a genuine pair");
        if is_duplicate_pair(
            direction_alpha(problem, i, j),
            problem.col_sq_norm(i),
            problem.col_sq_norm(j),
        ) {
            eliminate_duplicate(&mut state, lambda, i, j);
            monitor(SolveEvent::Eliminated { index: i });
            continue;
        }
        let q = direction_coefficients(problem, &state.x, state.f, grad[i], grad[j], i, j);
        let u = minimize_univariate(&q, lambda)?;
        apply_step(&mut state, lambda, i, j, u, &q, problem.column(i), problem.column(j));
        monitor(SolveEvent::Step { f: state.f });
        state.last_strategy = Some(Strategy::Mvp);
        return Ok(Initialization {
            state,
            bounds_at_zero: bounds,
            optimal: false,
        });
    }
}

fn direction_alpha<F: Scalar>(problem: &Problem<F>, i: usize, j: usize) -> F {
    let mut alpha = F::zero();
    for (&a, &b) in problem.column(i).iter().zip(problem.column(j)) {
        let d = a - b;
        alpha += d * d;
    }
    alpha
}

/// Indices of bitwise-duplicate columns (all but the lowest of each group).
fn dedup_scan<F: Scalar>(problem: &Problem<F>) -> Vec<usize> {
    use std::collections::hash_map::DefaultHasher;
    use std::collections::HashMap;
    use std::hash::{Hash, Hasher};

    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    for j in 0..problem.n_features() {
        let mut h = DefaultHasher::new();
        for &v in problem.column(j) {
            v.bit_pattern().hash(&mut h);
        }
        buckets.entry(h.finish()).or_default().push(j);
    }
    let mut removed = Vec::new();
    for (_, mut group) in buckets {
        group.sort_unstable();
        // Hash collisions are resolved by exact comparison against the
        // surviving representatives of the bucket.
        let mut reps: Vec<usize> = Vec::new();
        for j in group {
            if reps.iter().any(|&r| problem.column(r) == problem.column(j)) {
                removed.push(j);
            } else {
                reps.push(j);
            }
        }
    }
    removed.sort_unstable();
    removed
}

/// One full-gradient iteration. Returns the stationarity bounds at the
/// *current* point (before any step); if they already pass the stopping
/// test the state is left untouched.
pub fn mvp_iteration<F: Scalar>(
    problem: &Problem<F>,
    state: &mut SolverState<F>,
    config: &SolverConfig<F>,
) -> Result<EtaBounds<F>, Error> {
    mvp_iteration_impl(problem, state, config, &mut |_| {})
}

fn mvp_iteration_impl<F: Scalar, M: FnMut(SolveEvent<F>)>(
    problem: &Problem<F>,
    state: &mut SolverState<F>,
    config: &SolverConfig<F>,
    monitor: &mut M,
) -> Result<EtaBounds<F>, Error> {
    let lambda = problem.lambda();
    let grad = full_gradient(problem, &state.r);
    let mu = multiplier(&state.x, &grad, lambda, config.p_exp)?;
    for (pi, &g) in state.pi.iter_mut().zip(&grad) {
        *pi = g - mu;
    }

    let bounds = eta_bounds_excluding(&state.x, &grad, lambda, &state.removed);
    if bounds.converged(config.eps_opt) {
        return Ok(bounds);
    }

    let partition = estimate_active_set(&state.x, &state.pi, lambda, &state.removed);
    let (i, j, _) = mvp_pair(&state.x, &grad, lambda, &partition.nonactive)?;
    if i == j {
        // Singleton nonactive set: no direction; the next iteration falls
        // through to AC2CD.
        return Ok(bounds);
    }
    if is_duplicate_pair(
        direction_alpha(problem, i, j),
        problem.col_sq_norm(i),
        problem.col_sq_norm(j),
    ) {
        eliminate_duplicate(state, lambda, i, j);
        monitor(SolveEvent::Eliminated { index: i });
        return Ok(bounds);
    }
    let q = direction_coefficients(problem, &state.x, state.f, grad[i], grad[j], i, j);
    let u = minimize_univariate(&q, lambda)?;
    apply_step(state, lambda, i, j, u, &q, problem.column(i), problem.column(j));
    monitor(SolveEvent::Step { f: state.f });
    Ok(bounds)
}

/// One almost-cyclic sweep. The stationarity proxy is carried over from the
/// previous iteration; no full gradient is computed. Returns the number of
/// inner exact steps performed.
pub fn ac2cd_iteration<F: Scalar>(
    problem: &Problem<F>,
    state: &mut SolverState<F>,
    config: &SolverConfig<F>,
) -> Result<usize, Error> {
    ac2cd_iteration_impl(problem, state, config, &mut |_| {})
}

fn ac2cd_iteration_impl<F: Scalar, M: FnMut(SolveEvent<F>)>(
    problem: &Problem<F>,
    state: &mut SolverState<F>,
    config: &SolverConfig<F>,
    monitor: &mut M,
) -> Result<usize, Error> {
    let lambda = problem.lambda();
    let partition = estimate_active_set(&state.x, &state.pi, lambda, &state.removed);
    let anchor = select_anchor(&state.x, &partition.nonactive, config.tau)?;

    let mut order = partition.nonactive;
    order.shuffle(&mut state.rng);

    let mut steps = 0usize;
    for &idx in &order {
        if idx == anchor || state.removed[idx] {
            continue;
        }
        // Both partial derivatives come from the current residual; one
        // fused pass also measures the direction curvature.
        let (g_i, g_j, alpha) =
            pair_stats(problem.column(idx), problem.column(anchor), &state.r);
        let q = PiecewiseQuadratic::from_parts(
            alpha,
            state.x[idx],
            state.x[anchor],
            g_i,
            g_j,
            lambda,
            state.f,
        );
        if is_duplicate_pair(q.alpha, problem.col_sq_norm(idx), problem.col_sq_norm(anchor)) {
            eliminate_duplicate(state, lambda, idx, anchor);
            monitor(SolveEvent::Eliminated { index: idx });
            continue;
        }
        let u = minimize_univariate(&q, lambda)?;
        apply_step(
            state,
            lambda,
            idx,
            anchor,
            u,
            &q,
            problem.column(idx),
            problem.column(anchor),
        );
        monitor(SolveEvent::Step { f: state.f });
        steps += 1;
    }
    Ok(steps)
}

/// Full solve from the zero start point.
pub fn solve<F: Scalar>(
    problem: &Problem<F>,
    config: &SolverConfig<F>,
) -> Result<SolverResult<F>, Error> {
    solve_inner(problem, config, None, &mut |_| {})
}

/// Solve starting from a feasible warm point (typically the solution at the
/// previous, larger regularization weight). The first iteration is forced
/// to MVP so the stationarity proxy is rebuilt from a fresh gradient.
pub fn solve_warm<F: Scalar>(
    problem: &Problem<F>,
    config: &SolverConfig<F>,
    x0: &[F],
) -> Result<SolverResult<F>, Error> {
    solve_inner(problem, config, Some(x0), &mut |_| {})
}

/// [`solve`] with an event monitor; used by tests to audit runs.
pub fn solve_with_monitor<F: Scalar, M: FnMut(SolveEvent<F>)>(
    problem: &Problem<F>,
    config: &SolverConfig<F>,
    monitor: &mut M,
) -> Result<SolverResult<F>, Error> {
    solve_inner(problem, config, None, monitor)
}

fn solve_inner<F: Scalar, M: FnMut(SolveEvent<F>)>(
    problem: &Problem<F>,
    config: &SolverConfig<F>,
    warm: Option<&[F]>,
    monitor: &mut M,
) -> Result<SolverResult<F>, Error> {
    config.validate()?;
    let lambda = problem.lambda();

    let (mut state, optimal_at_entry) = match warm {
        Some(x0) if x0.iter().any(|v| *v != F::zero()) => {
            (SolverState::warm(problem, config, x0)?, false)
        }
        _ => {
            let init = initialize_impl(problem, config, monitor)?;
            (init.state, init.optimal)
        }
    };

    let mut outer = 0usize;
    let mut mvp_iters = 0usize;
    let mut inner_steps = 0usize;
    let mut converged = optimal_at_entry;
    // Hand-off after the initial step: the first loop iteration always
    // runs MVP, both after the cold initial step and from a warm point.
    let mut next = Strategy::Mvp;

    while !converged {
        if outer >= config.max_outer_iters {
            break;
        }
        let f_before = state.f;
        let strategy = next;
        match strategy {
            Strategy::Mvp => {
                let bounds = mvp_iteration_impl(problem, &mut state, config, monitor)?;
                mvp_iters += 1;
                state.theta = config.theta_min.max(config.theta_decay * state.theta);
                if bounds.converged(config.eps_opt) {
                    converged = true;
                }
            }
            Strategy::Ac2cd => {
                inner_steps += ac2cd_iteration_impl(problem, &mut state, config, monitor)?;
            }
        }
        state.last_strategy = Some(strategy);
        outer += 1;
        monitor(SolveEvent::Outer {
            k: outer,
            strategy,
            f_before,
            f_after: state.f,
            zero_sum_abs: state.zero_sum_abs(),
            norm1: matrix::norm1(&state.x),
        });
        if converged {
            break;
        }
        if outer.is_multiple_of(config.audit_every) {
            let drift = state.refresh_residual(problem);
            monitor(SolveEvent::Audit { drift });
        }
        next = select_strategy(f_before, state.f, state.theta, state.last_strategy);
    }

    // Final audit: residual from scratch plus one full-gradient check.
    let drift = state.refresh_residual(problem);
    monitor(SolveEvent::Audit { drift });
    let grad = full_gradient(problem, &state.r);
    let bounds = eta_bounds_excluding(&state.x, &grad, lambda, &state.removed);
    let status = if bounds.converged(config.eps_opt) {
        SolverStatus::Optimal
    } else {
        SolverStatus::MaxIters
    };

    let removed = state
        .removed
        .iter()
        .enumerate()
        .filter_map(|(i, &r)| r.then_some(i))
        .collect();
    Ok(SolverResult {
        x_star: state.x,
        objective: state.f,
        gap: bounds.gap,
        gap_scale: bounds.scale(),
        outer_iters: outer,
        mvp_iters,
        ac2cd_inner_steps: inner_steps,
        removed,
        status,
    })
}
