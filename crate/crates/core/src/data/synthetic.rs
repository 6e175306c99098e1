use crate::error::{Error, Result};
use crate::objectives::{softmax, LogSumExpProblem, QuadraticProblem};
use crate::operator::DenseSymmetric;

use super::RngStream;

/// Shape, regularization and seed of a randomly generated test problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, m: usize, gamma: f64, seed: u64) -> Result<Self> {
        let spec = Self { n, m, gamma, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("n must be at least 2, got {}", self.n)));
        }
        if self.m < 1 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Regularized log-sum-exp with minimizer at the origin.
///
/// Rows `ĉ_j` are drawn first (row by row), then the offsets `b_j`, all
/// uniform on `[-1, 1]` from the `"data"` stream. The rows are then shifted
/// by the gradient at zero of `ln Σ exp(⟨ĉ_j, x⟩ − b_j)`, which makes the
/// gradient of the full objective vanish at `x = 0`.
pub fn generate_logsumexp(spec: &SyntheticSpec) -> Result<LogSumExpProblem> {
    spec.validate()?;
    let SyntheticSpec { n, m, gamma, seed } = *spec;
    let mut rng = RngStream::new(seed, "data");
    let mut c: Vec<f64> = (0..m * n).map(|_| rng.uniform_pm1()).collect();
    let b: Vec<f64> = (0..m).map(|_| rng.uniform_pm1()).collect();

    let logits: Vec<f64> = b.iter().map(|bj| -bj).collect();
    let pi = softmax(&logits);
    let mut shift = vec![0.0; n];
    for (j, pj) in pi.iter().enumerate() {
        for i in 0..n {
            shift[i] += pj * c[j * n + i];
        }
    }
    for j in 0..m {
        for i in 0..n {
            c[j * n + i] -= shift[i];
        }
    }
    LogSumExpProblem::new(n, c, b, gamma)
}

/// Quadratic `½⟨Ax,x⟩ − ⟨b,x⟩` with `A = Σ c_j c_jᵀ + γI`, rows `c_j` and
/// `b` uniform on `[-1, 1]` from the `"data"` stream.
pub fn generate_quadratic(spec: &SyntheticSpec) -> Result<QuadraticProblem> {
    spec.validate()?;
    let SyntheticSpec { n, m, gamma, seed } = *spec;
    let mut rng = RngStream::new(seed, "data");
    let c: Vec<f64> = (0..m * n).map(|_| rng.uniform_pm1()).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.uniform_pm1()).collect();
    let a = DenseSymmetric::from_fn(n, |i, k| {
        let mut s = if i == k { gamma } else { 0.0 };
        for j in 0..m {
            s += c[j * n + i] * c[j * n + k];
        }
        s
    })?;
    QuadraticProblem::new(a, b)
}

/// Uniform point on the Euclidean sphere of radius `1/n` around the origin,
/// from the `"start"` stream.
pub fn generate_start(n: usize, seed: u64) -> Vec<f64> {
    assert!(n >= 1, "dimension must be positive");
    let mut rng = RngStream::new(seed, "start");
    let radius = 1.0 / n as f64;
    rng.unit_sphere(n).into_iter().map(|v| v * radius).collect()
}
