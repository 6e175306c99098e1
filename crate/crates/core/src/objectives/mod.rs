//! Objective oracles with gradients, Hessian diagonals, Hessian-vector
//! products and problem constants.
//!
//! All three objectives are measured against the coordinate basis, so the
//! constants `μ ≤ L` bound the Hessian spectrum in the Euclidean metric.

mod logistic;
mod logsumexp;
mod quadratic;

pub use logistic::LogisticProblem;
pub use logsumexp::LogSumExpProblem;
pub use quadratic::QuadraticProblem;

use crate::error::Result;
use crate::operator::DenseSymmetric;

/// Largest dimension for which dense Hessians are assembled by default.
pub const DEFAULT_HESSIAN_CAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    /// Gradient Lipschitz constant.
    pub lipschitz: f64,
    /// Strong convexity constant, when one is certified.
    pub mu: Option<f64>,
    /// Strong self-concordance constant, when one is known.
    pub self_concordance: Option<f64>,
}

/// Evaluation interface shared by every solver.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `⟨∇²f(x) e_i, e_i⟩` for every coordinate.
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `∇²f(x) · h`.
    fn hessian_vec(&self, x: &[f64], h: &[f64]) -> Result<Vec<f64>>;

    /// Dense Hessian; fails with `DimensionTooLarge` above the cap.
    fn full_hessian(&self, x: &[f64]) -> Result<DenseSymmetric>;

    fn has_full_hessian(&self) -> bool {
        true
    }

    fn constants(&self) -> ProblemConstants;

    fn lipschitz(&self) -> f64 {
        self.constants().lipschitz
    }

    fn self_concordance(&self) -> Option<f64> {
        self.constants().self_concordance
    }
}

/// Softmax with max-subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|t| (t - max).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    out
}

/// `ln Σ exp(t_j)` with max-subtraction.
pub fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

pub(crate) fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(crate::Error::DimensionTooLarge { n, cap })
    } else {
        Ok(())
    }
}
