use thiserror::Error;

/// Errors raised by the algebra, operators, vector fields and integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not skew-symmetric (residual {residual:e})")]
    NotSkew { residual: f64 },

    #[error("matrix is not a rotation (orthogonality defect {defect:e}, det {det})")]
    NotRotation { defect: f64, det: f64 },

    #[error("vector is not of unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("operator is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("operator is not symmetric (residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("singular {what}")]
    Singular { what: &'static str },

    #[error("element lies outside the subspace (residual {residual:e})")]
    NotInSubspace { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint `{name}` violated (residual {residual:e})")]
    ConstraintViolated { name: String, residual: f64 },

    #[error("quantity `{0}` is not defined for this system")]
    UndefinedQuantity(String),

    #[error("polar projection failed (smallest singular value {sigma_min:e})")]
    Projection { sigma_min: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
