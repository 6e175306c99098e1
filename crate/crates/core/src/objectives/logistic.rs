use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot};
use crate::operator::DenseSymmetric;

use super::{check_cap, Objective, ProblemConstants, DEFAULT_HESSIAN_CAP};

/// `f(x) = Σ ln(1 + exp(−b_j⟨c_j,x⟩)) + (γ/2)‖x‖²` with labels `b_j ∈ {−1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticProblem {
    n: usize,
    c: Vec<f64>,
    labels: Vec<f64>,
    gamma: f64,
    self_concordance: Option<f64>,
    hessian_cap: usize,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)`
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

impl LogisticProblem {
    pub fn new(n: usize, c: Vec<f64>, labels: Vec<f64>, gamma: f64) -> Result<Self> {
        if n == 0 || labels.is_empty() {
            return Err(Error::InvalidArgument("n and m must be positive".into()));
        }
        check_dim(n * labels.len(), c.len())?;
        if let Some(bad) = labels.iter().find(|l| **l != 1.0 && **l != -1.0) {
            return Err(Error::UnmappedLabel(bad.to_string()));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be non-negative, got {gamma}")));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            n,
            c,
            labels,
            gamma,
            self_concordance: None,
            hessian_cap: DEFAULT_HESSIAN_CAP,
        })
    }

    /// Supplies a self-concordance constant so the corrected scheme can run.
    pub fn with_self_concordance(mut self, m: f64) -> Self {
        self.self_concordance = Some(m);
        self
    }

    pub fn with_hessian_cap(mut self, cap: usize) -> Self {
        self.hessian_cap = cap;
        self
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.c[j * self.n..(j + 1) * self.n]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Margins `b_j⟨c_j, x⟩`.
    fn margins(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        Ok((0..self.m()).map(|j| self.labels[j] * dot(self.row(j), x)).collect())
    }

    /// Curvature weights `s_j(1 − s_j)`.
    fn curvature(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .margins(x)?
            .into_iter()
            .map(|t| {
                let s = sigmoid(t);
                s * (1.0 - s)
            })
            .collect())
    }
}

impl Objective for LogisticProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let loss: f64 = self.margins(x)?.into_iter().map(|t| softplus(-t)).sum();
        let v = loss + 0.5 * self.gamma * dot(x, x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteResult)
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let margins = self.margins(x)?;
        let mut g: Vec<f64> = x.iter().map(|v| self.gamma * v).collect();
        for (j, t) in margins.into_iter().enumerate() {
            axpy(-self.labels[j] * sigmoid(-t), self.row(j), &mut g);
        }
        Ok(g)
    }

    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        let w = self.curvature(x)?;
        let mut diag = vec![self.gamma; self.n];
        for (j, wj) in w.into_iter().enumerate() {
            for (d, c) in diag.iter_mut().zip(self.row(j)) {
                *d += wj * c * c;
            }
        }
        Ok(diag)
    }

    fn hessian_vec(&self, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, h.len())?;
        let w = self.curvature(x)?;
        let mut out: Vec<f64> = h.iter().map(|v| self.gamma * v).collect();
        for (j, wj) in w.into_iter().enumerate() {
            let row = self.row(j);
            axpy(wj * dot(row, h), row, &mut out);
        }
        Ok(out)
    }

    fn full_hessian(&self, x: &[f64]) -> Result<DenseSymmetric> {
        check_cap(self.n, self.hessian_cap)?;
        let w = self.curvature(x)?;
        let n = self.n;
        let mut h = vec![0.0; n * n];
        for (j, wj) in w.into_iter().enumerate() {
            let row = self.row(j);
            for a in 0..n {
                let wa = wj * row[a];
                if wa == 0.0 {
                    continue;
                }
                for b in a..n {
                    h[a * n + b] += wa * row[b];
                }
            }
        }
        DenseSymmetric::from_fn(n, |a, b| h[a * n + b] + if a == b { self.gamma } else { 0.0 })
    }

    fn constants(&self) -> ProblemConstants {
        let row_norms: f64 = self.c.iter().map(|v| v * v).sum();
        ProblemConstants {
            lipschitz: 0.25 * row_norms + self.gamma,
            mu: Some(self.gamma),
            self_concordance: self.self_concordance,
        }
    }
}
