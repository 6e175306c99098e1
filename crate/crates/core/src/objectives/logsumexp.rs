use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;
use crate::operator::DenseSymmetric;

use super::{check_cap, log_sum_exp, softmax, Objective, ProblemConstants, DEFAULT_HESSIAN_CAP};

/// `f(x) = ln Σ exp(⟨c_j,x⟩ − b_j) + ½ Σ ⟨c_j,x⟩² + (γ/2)‖x‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSumExpProblem {
    n: usize,
    c: Vec<f64>,
    b: Vec<f64>,
    gamma: f64,
    hessian_cap: usize,
}

struct Point {
    /// `⟨c_j, x⟩`
    inner: Vec<f64>,
    /// softmax weights of `⟨c_j, x⟩ − b_j`
    pi: Vec<f64>,
    /// `Σ π_j c_j`
    g: Vec<f64>,
}

impl LogSumExpProblem {
    /// `c` holds the rows `c_j` row-major (`m × n`), `m = b.len()`.
    pub fn new(n: usize, c: Vec<f64>, b: Vec<f64>, gamma: f64) -> Result<Self> {
        if n == 0 || b.is_empty() {
            return Err(Error::InvalidArgument("n and m must be positive".into()));
        }
        check_dim(n * b.len(), c.len())?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        if c.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            n,
            c,
            b,
            gamma,
            hessian_cap: DEFAULT_HESSIAN_CAP,
        })
    }

    pub fn with_hessian_cap(mut self, cap: usize) -> Self {
        self.hessian_cap = cap;
        self
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn rows(&self) -> &[f64] {
        &self.c
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.c[j * self.n..(j + 1) * self.n]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Softmax weights `π_j(x)`.
    pub fn weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.point(x)?.pi)
    }

    fn point(&self, x: &[f64]) -> Result<Point> {
        check_dim(self.n, x.len())?;
        let inner: Vec<f64> = (0..self.m()).map(|j| dot(self.row(j), x)).collect();
        let logits: Vec<f64> = inner.iter().zip(&self.b).map(|(s, b)| s - b).collect();
        let pi = softmax(&logits);
        let mut g = vec![0.0; self.n];
        for (j, pj) in pi.iter().enumerate() {
            crate::linalg::axpy(*pj, self.row(j), &mut g);
        }
        Ok(Point { inner, pi, g })
    }
}

impl Objective for LogSumExpProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x.len())?;
        let inner: Vec<f64> = (0..self.m()).map(|j| dot(self.row(j), x)).collect();
        let logits: Vec<f64> = inner.iter().zip(&self.b).map(|(s, b)| s - b).collect();
        let v = log_sum_exp(&logits) + 0.5 * dot(&inner, &inner) + 0.5 * self.gamma * dot(x, x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteResult)
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.point(x)?;
        let mut grad = p.g;
        for (j, s) in p.inner.iter().enumerate() {
            crate::linalg::axpy(*s, self.row(j), &mut grad);
        }
        crate::linalg::axpy(self.gamma, x, &mut grad);
        Ok(grad)
    }

    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.point(x)?;
        let mut diag = vec![0.0; self.n];
        for (j, pj) in p.pi.iter().enumerate() {
            let w = pj + 1.0;
            for (d, c) in diag.iter_mut().zip(self.row(j)) {
                *d += w * c * c;
            }
        }
        for (d, gi) in diag.iter_mut().zip(&p.g) {
            *d += self.gamma - gi * gi;
        }
        Ok(diag)
    }

    fn hessian_vec(&self, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, h.len())?;
        let p = self.point(x)?;
        let mut out: Vec<f64> = h.iter().map(|v| self.gamma * v).collect();
        for (j, pj) in p.pi.iter().enumerate() {
            let row = self.row(j);
            crate::linalg::axpy((pj + 1.0) * dot(row, h), row, &mut out);
        }
        crate::linalg::axpy(-dot(&p.g, h), &p.g, &mut out);
        Ok(out)
    }

    fn full_hessian(&self, x: &[f64]) -> Result<DenseSymmetric> {
        check_cap(self.n, self.hessian_cap)?;
        let p = self.point(x)?;
        let n = self.n;
        let mut h = vec![0.0; n * n];
        for (j, pj) in p.pi.iter().enumerate() {
            let w = pj + 1.0;
            let row = self.row(j);
            for a in 0..n {
                let wa = w * row[a];
                for b in a..n {
                    h[a * n + b] += wa * row[b];
                }
            }
        }
        DenseSymmetric::from_fn(n, |a, b| {
            let mut v = h[a * n + b] - p.g[a] * p.g[b];
            if a == b {
                v += self.gamma;
            }
            v
        })
    }

    fn constants(&self) -> ProblemConstants {
        let row_norms: f64 = self.c.iter().map(|v| v * v).sum();
        ProblemConstants {
            lipschitz: 2.0 * row_norms + self.gamma,
            mu: Some(self.gamma),
            self_concordance: Some(2.0),
        }
    }
}
