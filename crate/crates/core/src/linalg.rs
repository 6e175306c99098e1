//! Small dense vector helpers and the symmetric eigen solver used by the
//! O(n³) diagnostics.

use nalgebra::DMatrix;

use crate::operator::DenseSymmetric;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &DenseSymmetric) -> Vec<f64> {
    let n = m.dim();
    let dm = DMatrix::from_row_slice(n, n, m.as_slice());
    let mut values: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

pub fn min_eigenvalue(m: &DenseSymmetric) -> f64 {
    symmetric_eigenvalues(m)[0]
}

pub fn max_eigenvalue(m: &DenseSymmetric) -> f64 {
    *symmetric_eigenvalues(m).last().expect("non-empty matrix")
}
