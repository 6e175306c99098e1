use thiserror::Error;

/// Errors raised by the operator, update, objective, solver and data layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix entries are not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("rank-two update makes the operator singular (capacitance determinant {det:e})")]
    SingularCapacitance { det: f64 },

    #[error("scale factor must be positive and finite, got {0}")]
    NonPositiveScale(f64),

    #[error("non-positive curvature along the update direction (<Au,u> = {auu:e}, <Gu,u> = {guu:e})")]
    NonPositiveCurvature { auu: f64, guu: f64 },

    #[error("Broyden parameter must lie in [0, 1], got {0}")]
    InvalidTau(f64),

    #[error("Hessian diagonal entry {index} is not positive ({value:e})")]
    NonPositiveHessianDiagonal { index: usize, value: f64 },

    #[error("objective evaluation produced a non-finite result")]
    NonFiniteResult,

    #[error("dimension {n} exceeds the dense diagnostics cap {cap}")]
    DimensionTooLarge { n: usize, cap: usize },

    #[error("malformed LIBSVM line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("feature indices not strictly increasing on line {line}")]
    NonMonotoneIndices { line: usize },

    #[error("label {0} is not mapped to -1 or +1")]
    UnmappedLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
