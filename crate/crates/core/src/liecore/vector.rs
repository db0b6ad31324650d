use nalgebra::DVector;

use crate::error::{Error, Result};

/// Tolerance on `| ‖v‖ - 1 |`.
pub const UNIT_TOL: f64 = 1e-12;

/// A unit vector of ℝⁿ (contact points, vertical direction).
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector {
    v: DVector<f64>,
}

impl UnitVector {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self { v })
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(v: DVector<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self { v: v / norm })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// Standard basis vector `e_i` (zero based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        Self { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_checks() {
        assert!(UnitVector::from_slice(&[0.6, 0.8]).is_ok());
        assert!(matches!(UnitVector::from_slice(&[1.0, 1.0]), Err(Error::NotUnit { .. })));
        let u = UnitVector::normalized(DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert!((u.as_vector().norm() - 1.0).abs() < 1e-15);
        assert!(UnitVector::normalized(DVector::zeros(3)).is_err());
    }
}
