use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Tolerance on `‖X + Xᵀ‖∞` accepted when wrapping a raw matrix.
pub const SKEW_TOL: f64 = 1e-12;

/// Dimension `n(n-1)/2` of so(n).
pub fn bivector_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic position of `E_ij` (`i < j`) in the bivector basis.
pub fn bivector_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// The index pairs `(i, j)`, `i < j`, in basis order.
pub fn bivector_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// An element of so(n), stored as a dense antisymmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    m: DMatrix<f64>,
}

impl SkewMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    /// Wraps `m`, rejecting it unless it is antisymmetric to [`SKEW_TOL`]
    /// relative to its magnitude. The stored value is `(m - mᵀ)/2`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        check_dim(m.nrows(), m.ncols())?;
        let scale = m.amax().max(1.0);
        let residual = (&m + m.transpose()).amax();
        if residual > SKEW_TOL * scale {
            return Err(Error::NotSkew { residual });
        }
        Ok(Self::skew_part(&m))
    }

    /// Antisymmetric part `(m - mᵀ)/2` of an arbitrary square matrix.
    pub fn skew_part(m: &DMatrix<f64>) -> Self {
        Self { m: (m - m.transpose()) * 0.5 }
    }

    /// Basis bivector `E_ij = e_i eⱼᵀ - e_j eᵢᵀ`.
    pub fn basis(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m[(j, i)] = -1.0;
        Self { m }
    }

    /// Builds `Σ x_ij E_ij` from coordinates in basis order.
    pub fn from_coords(n: usize, coords: &[f64]) -> Result<Self> {
        check_dim(bivector_dim(n), coords.len())?;
        let mut m = DMatrix::zeros(n, n);
        for ((i, j), &x) in bivector_pairs(n).zip(coords) {
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
        Ok(Self { m })
    }

    pub fn from_coord_vector(n: usize, coords: &DVector<f64>) -> Result<Self> {
        Self::from_coords(n, coords.as_slice())
    }

    /// Coordinates in the orthonormal basis `{E_ij}`.
    pub fn coords(&self) -> DVector<f64> {
        let n = self.dim();
        DVector::from_iterator(bivector_dim(n), bivector_pairs(n).map(|(i, j)| self.m[(i, j)]))
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

    /// Killing-proportional product `-½ tr(XY)`. Panics on dimension mismatch.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "so(n) dimension mismatch");
        -0.5 * self.m.component_mul(&other.m.transpose()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }

    /// Commutator `XY - YX`. Panics on dimension mismatch.
    pub fn bracket(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "so(n) dimension mismatch");
        let xy = &self.m * &other.m;
        Self { m: &xy - xy.transpose() }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * v
    }

    /// `‖X + Xᵀ‖∞`, zero for every value built through this type.
    pub fn skew_residual(&self) -> f64 {
        (&self.m + self.m.transpose()).amax()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }
}

impl Add for &SkewMatrix {
    type Output = SkewMatrix;
    fn add(self, rhs: &SkewMatrix) -> SkewMatrix {
        SkewMatrix { m: &self.m + &rhs.m }
    }
}

impl Add for SkewMatrix {
    type Output = SkewMatrix;
    fn add(self, rhs: SkewMatrix) -> SkewMatrix {
        SkewMatrix { m: self.m + rhs.m }
    }
}

impl AddAssign<&SkewMatrix> for SkewMatrix {
    fn add_assign(&mut self, rhs: &SkewMatrix) {
        self.m += &rhs.m;
    }
}

impl Sub for &SkewMatrix {
    type Output = SkewMatrix;
    fn sub(self, rhs: &SkewMatrix) -> SkewMatrix {
        SkewMatrix { m: &self.m - &rhs.m }
    }
}

impl Sub for SkewMatrix {
    type Output = SkewMatrix;
    fn sub(self, rhs: SkewMatrix) -> SkewMatrix {
        SkewMatrix { m: self.m - rhs.m }
    }
}

impl Neg for SkewMatrix {
    type Output = SkewMatrix;
    fn neg(self) -> SkewMatrix {
        SkewMatrix { m: -self.m }
    }
}

impl Neg for &SkewMatrix {
    type Output = SkewMatrix;
    fn neg(self) -> SkewMatrix {
        SkewMatrix { m: -&self.m }
    }
}

impl Mul<f64> for &SkewMatrix {
    type Output = SkewMatrix;
    fn mul(self, s: f64) -> SkewMatrix {
        SkewMatrix { m: &self.m * s }
    }
}

impl Mul<f64> for SkewMatrix {
    type Output = SkewMatrix;
    fn mul(self, s: f64) -> SkewMatrix {
        SkewMatrix { m: self.m * s }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_matches_pair_enumeration() {
        for n in 2..7 {
            for (k, (i, j)) in bivector_pairs(n).enumerate() {
                assert_eq!(bivector_index(n, i, j), k);
            }
            assert_eq!(bivector_pairs(n).count(), bivector_dim(n));
        }
    }

    #[test]
    fn coords_round_trip() {
        let c = [0.3, -1.2, 2.0, 0.5, 0.0, 7.0];
        let x = SkewMatrix::from_coords(4, &c).unwrap();
        assert_eq!(x.coords().as_slice(), &c);
        assert_eq!(x.skew_residual(), 0.0);
    }

    #[test]
    fn rejects_symmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(SkewMatrix::from_matrix(m), Err(Error::NotSkew { .. })));
        assert!(SkewMatrix::from_coords(3, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn basis_is_orthonormal() {
        let n = 4;
        let basis: Vec<_> = bivector_pairs(n).map(|(i, j)| SkewMatrix::basis(n, i, j)).collect();
        for (a, x) in basis.iter().enumerate() {
            for (b, y) in basis.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert_eq!(x.dot(y), expected);
            }
        }
    }
}
