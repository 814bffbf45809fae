//! JSON schema of `solve` results (`result.json`).

use serde::{Deserialize, Serialize};
use zerosum_lasso::{SolverResult, SolverStatus};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseEntry {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformFlags {
    pub log: bool,
    pub center: bool,
}

/// Everything `solve` knows about its run; solutions are stored sparsely
/// since the whole point of the penalty is that most entries are zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub m: usize,
    pub n: usize,
    pub lambda: f64,
    pub eps: f64,
    pub seed: u64,
    pub status: String,
    pub objective: f64,
    pub gap: f64,
    pub gap_scale: f64,
    pub nnz: usize,
    pub outer_iters: usize,
    pub mvp_iters: usize,
    pub ac2cd_inner_steps: usize,
    pub removed: Vec<usize>,
    pub transform: TransformFlags,
    pub x: Vec<SparseEntry>,
}

impl SolveReport {
    pub fn from_result(
        result: &SolverResult<f64>,
        m: usize,
        n: usize,
        lambda: f64,
        eps: f64,
        seed: u64,
        transform: TransformFlags,
    ) -> Self {
        Self {
            m,
            n,
            lambda,
            eps,
            seed,
            status: match result.status {
                SolverStatus::Optimal => "optimal".into(),
                SolverStatus::MaxIters => "max_iters".into(),
            },
            objective: result.objective,
            gap: result.gap,
            gap_scale: result.gap_scale,
            nnz: result.nnz(),
            outer_iters: result.outer_iters,
            mvp_iters: result.mvp_iters,
            ac2cd_inner_steps: result.ac2cd_inner_steps,
            removed: result.removed.clone(),
            transform,
            x: result
                .x_star
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(index, &value)| SparseEntry { index, value })
                .collect(),
        }
    }

    /// Dense solution vector of length `n`.
    pub fn dense_x(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for e in &self.x {
            x[e.index] = e.value;
        }
        x
    }
}
