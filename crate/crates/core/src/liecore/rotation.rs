use nalgebra::{DMatrix, DVector};

use super::expm::expm;
use super::skew::SkewMatrix;
use crate::error::{check_dim, Error, Result};

/// Tolerance on `‖gᵀg - Id‖∞` and `|det g - 1|`.
pub const ORTHO_TOL: f64 = 1e-10;

/// An element of SO(n).
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    m: DMatrix<f64>,
}

/// `‖mᵀm - Id‖∞`.
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m.transpose() * m - DMatrix::<f64>::identity(n, n)).amax()
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n) }
    }

    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_dim(m.nrows(), m.ncols())?;
        let defect = orthogonality_defect(&m);
        let det = m.determinant();
        if defect > ORTHO_TOL || (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::NotRotation { defect, det });
        }
        Ok(Self { m })
    }

    /// Wraps an integrator stage value that is only approximately orthogonal.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    /// Nearest rotation in the Frobenius norm (orthogonal polar factor).
    pub fn project(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        check_dim(n, m.ncols())?;
        // The SVD iteration does not terminate on non-finite input.
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Projection { sigma_min: f64::NAN });
        }
        let svd = m.clone().svd(true, true);
        let sigma_min = svd.singular_values.min();
        if !(sigma_min > 1e-8) {
            return Err(Error::Projection { sigma_min });
        }
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let q = &u * &v_t;
        if q.determinant() < 0.0 {
            return Err(Error::Projection { sigma_min: 0.0 });
        }
        Ok(Self { m: q })
    }

    /// `exp(X)` for `X` in so(n).
    pub fn exp(x: &SkewMatrix) -> Self {
        Self { m: expm(x.as_matrix()) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn inverse(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "SO(n) dimension mismatch");
        Self { m: &self.m * &other.m }
    }

    pub fn act(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * v
    }

    pub fn orthogonality_defect(&self) -> f64 {
        orthogonality_defect(&self.m)
    }
}
