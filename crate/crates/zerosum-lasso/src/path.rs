//! Regularization-weight grids and warm-started path solving.
//!
//! Grids are geometric between `hi_frac * lambda_max` and
//! `lo_frac * lambda_max`. Solving along a decreasing grid can reuse the
//! previous solution as a warm start; the solver's first iteration is then
//! a full-gradient one, so the stationarity proxy is rebuilt before any
//! sweep relies on it. The progress threshold restarts from its initial
//! value at every grid point.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::Error;
use crate::matrix::DenseMatrix;
use crate::problem::{Problem, SolverConfig, SolverResult, SolverStatus};
use crate::scalar::Scalar;

/// Strictly decreasing list of positive regularization weights.
#[derive(Debug, Clone)]
pub struct LambdaGrid<F> {
    pub values: Vec<F>,
}

/// Geometric grid `hi_frac * lmax` down to `lo_frac * lmax` with `count`
/// points: `lambda_k = hi_frac * lmax * (lo_frac / hi_frac)^{(k-1)/(count-1)}`.
// Negated comparisons so NaN inputs are rejected too.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn lambda_grid<F: Scalar>(
    lmax: F,
    count: usize,
    hi_frac: F,
    lo_frac: F,
) -> Result<LambdaGrid<F>, Error> {
    if !(lmax > F::zero()) {
        return Err(Error::InvalidConfig(
            "lambda_max must be positive to build a grid (x = 0 solves everything otherwise)",
        ));
    }
    if count < 2 {
        return Err(Error::InvalidConfig("grid needs at least two points"));
    }
    if !(lo_frac > F::zero() && lo_frac < hi_frac && hi_frac <= F::one()) {
        return Err(Error::InvalidConfig("need 0 < lo_frac < hi_frac <= 1"));
    }
    let ratio = lo_frac / hi_frac;
    let denom = F::from_usize(count - 1).unwrap();
    let values = (0..count)
        .map(|k| hi_frac * lmax * ratio.powf(F::from_usize(k).unwrap() / denom))
        .collect();
    Ok(LambdaGrid { values })
}

impl<F: Scalar> LambdaGrid<F> {
    pub fn single(lambda: F) -> Self {
        Self {
            values: vec![lambda],
        }
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] > w[1])
    }
}

/// Solves the problem for every weight in the grid, in order. With
/// `warm_start` each solve begins at the previous optimum; otherwise every
/// solve is cold.
pub fn solve_path<F: Scalar>(
    a: &DenseMatrix<F>,
    y: &[F],
    grid: &LambdaGrid<F>,
    config: &SolverConfig<F>,
    warm_start: bool,
) -> Result<Vec<SolverResult<F>>, Error> {
    let mut results: Vec<SolverResult<F>> = Vec::with_capacity(grid.values.len());
    let mut prev_x: Option<Vec<F>> = None;
    for &lambda in &grid.values {
        let problem = Problem::new(a.clone(), y.to_vec(), lambda)?;
        let res = match (&prev_x, warm_start) {
            (Some(x0), true) => crate::solver::solve_warm(&problem, config, x0)?,
            _ => crate::solver::solve(&problem, config)?,
        };
        if warm_start {
            prev_x = Some(res.x_star.clone());
        }
        results.push(res);
    }
    Ok(results)
}

/// One row of the path report.
#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub objective: f64,
    pub gap: f64,
    pub nnz: usize,
    pub outer_iters: usize,
    pub mvp_iters: usize,
    pub ac2cd_inner_steps: usize,
    pub status: String,
}

pub fn path_report<F: Scalar>(grid: &LambdaGrid<F>, results: &[SolverResult<F>]) -> Vec<PathPoint> {
    grid.values
        .iter()
        .zip(results)
        .map(|(&lambda, r)| PathPoint {
            lambda: lambda.to_f64().unwrap(),
            objective: r.objective.to_f64().unwrap(),
            gap: r.gap.to_f64().unwrap(),
            nnz: r.nnz(),
            outer_iters: r.outer_iters,
            mvp_iters: r.mvp_iters,
            ac2cd_inner_steps: r.ac2cd_inner_steps,
            status: match r.status {
                SolverStatus::Optimal => "optimal".to_string(),
                SolverStatus::MaxIters => "max_iters".to_string(),
            },
        })
        .collect()
}

/// CSV report: `lambda,objective,gap,nnz,outer_iters,mvp_iters,ac2cd_inner_steps`.
pub fn write_report_csv<W: Write>(mut w: W, points: &[PathPoint]) -> io::Result<()> {
    writeln!(
        w,
        "lambda,objective,gap,nnz,outer_iters,mvp_iters,ac2cd_inner_steps"
    )?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.lambda, p.objective, p.gap, p.nnz, p.outer_iters, p.mvp_iters, p.ac2cd_inner_steps
        )?;
    }
    Ok(())
}

pub fn write_report_json<W: Write>(mut w: W, points: &[PathPoint]) -> io::Result<()> {
    let json = serde_json::to_string_pretty(points).expect("report serializes");
    w.write_all(json.as_bytes())?;
    writeln!(w)
}
