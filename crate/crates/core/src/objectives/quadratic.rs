use crate::error::{check_dim, Result};
use crate::linalg::{dot, symmetric_eigenvalues};
use crate::operator::{factorize, DenseSymmetric};

use super::{Objective, ProblemConstants};

/// `f(x) = ½⟨Ax,x⟩ − ⟨b,x⟩` with SPD `A`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    a: DenseSymmetric,
    b: Vec<f64>,
    mu: f64,
    lipschitz: f64,
}

impl QuadraticProblem {
    /// Checks definiteness and computes the extreme eigenvalues of `A`.
    pub fn new(a: DenseSymmetric, b: Vec<f64>) -> Result<Self> {
        check_dim(a.dim(), b.len())?;
        factorize(&a)?;
        let eig = symmetric_eigenvalues(&a);
        Ok(Self {
            mu: eig[0],
            lipschitz: *eig.last().unwrap(),
            a,
            b,
        })
    }

    pub fn a(&self) -> &DenseSymmetric {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `A⁻¹ b`.
    pub fn minimizer(&self) -> Result<Vec<f64>> {
        factorize(&self.a)?.solve(&self.b)
    }

    pub fn optimal_value(&self) -> Result<f64> {
        let x = self.minimizer()?;
        self.value(&x)
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let ax = self.a.apply(x)?;
        Ok(0.5 * dot(&ax, x) - dot(&self.b, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.a.apply(x)?;
        g.iter_mut().zip(&self.b).for_each(|(gi, bi)| *gi -= bi);
        Ok(g)
    }

    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.a.diagonal())
    }

    fn hessian_vec(&self, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        self.a.apply(h)
    }

    fn full_hessian(&self, x: &[f64]) -> Result<DenseSymmetric> {
        check_dim(self.dim(), x.len())?;
        Ok(self.a.clone())
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            lipschitz: self.lipschitz,
            mu: Some(self.mu),
            self_concordance: Some(0.0),
        }
    }
}
