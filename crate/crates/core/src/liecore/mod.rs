//! so(n) and SO(n) primitives.
//!
//! Conventions: `E_ij = e_i e_jᵀ - e_j e_iᵀ` for `i < j` in lexicographic order,
//! inner product `⟨X,Y⟩ = -½ tr(XY)`. The `E_ij` are orthonormal, so the
//! inner product equals the dot product of bivector coordinates.

pub mod expm;
pub mod rotation;
pub mod skew;
pub mod subspace;
pub mod vector;

use nalgebra::{DMatrix, DVector};

pub use rotation::{orthogonality_defect, Rotation, ORTHO_TOL};
pub use skew::{bivector_dim, bivector_index, bivector_pairs, SkewMatrix, SKEW_TOL};
pub use subspace::{BasisReport, SubspaceBasis, RANK_TOL};
pub use vector::{UnitVector, UNIT_TOL};

use crate::error::{check_dim, Result};

/// `x ∧ y = x yᵀ - y xᵀ`.
pub fn wedge(x: &DVector<f64>, y: &DVector<f64>) -> Result<SkewMatrix> {
    check_dim(x.len(), y.len())?;
    Ok(wedge_unchecked(x, y))
}

pub(crate) fn wedge_unchecked(x: &DVector<f64>, y: &DVector<f64>) -> SkewMatrix {
    SkewMatrix::skew_part(&((x * y.transpose()) * 2.0))
}

/// `⟨X,Y⟩ = -½ tr(XY)`.
pub fn inner(x: &SkewMatrix, y: &SkewMatrix) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(x.dot(y))
}

/// Commutator `[X,Y] = XY - YX`.
pub fn ad(x: &SkewMatrix, y: &SkewMatrix) -> Result<SkewMatrix> {
    check_dim(x.dim(), y.dim())?;
    Ok(x.bracket(y))
}

/// `Ad_g X = g X g⁻¹`.
pub fn adjoint_action(g: &Rotation, x: &SkewMatrix) -> Result<SkewMatrix> {
    check_dim(g.dim(), x.dim())?;
    Ok(conjugate(g.as_matrix(), x))
}

/// `Ad_{g⁻¹} X = gᵀ X g`.
pub fn adjoint_action_inverse(g: &Rotation, x: &SkewMatrix) -> Result<SkewMatrix> {
    check_dim(g.dim(), x.dim())?;
    Ok(conjugate(&g.as_matrix().transpose(), x))
}

/// `m X mᵀ`, re-skewed; `m` need not be exactly orthogonal.
pub(crate) fn conjugate(m: &DMatrix<f64>, x: &SkewMatrix) -> SkewMatrix {
    SkewMatrix::skew_part(&(m * x.as_matrix() * m.transpose()))
}

/// Orthogonal projection onto `ℝⁿ ∧ γ`: `X ↦ Xγγᵀ + γγᵀX`.
pub fn proj_wedge_subspace(gamma: &UnitVector, x: &SkewMatrix) -> Result<SkewMatrix> {
    check_dim(gamma.dim(), x.dim())?;
    Ok(proj_wedge_raw(gamma.as_vector(), x))
}

/// Same formula for an arbitrary vector (not renormalized).
pub(crate) fn proj_wedge_raw(gamma: &DVector<f64>, x: &SkewMatrix) -> SkewMatrix {
    let xg = x.apply(gamma);
    // Xγγᵀ + γγᵀX = (Xγ)γᵀ - γ(Xγ)ᵀ
    wedge_unchecked(&xg, gamma)
}

/// Orthogonal frame `Q` with last column `γ/|γ|`, from the Householder reflection
/// swapping `e_n` and `γ`. Its first `n-1` columns span `γ^⊥`.
pub fn householder_frame(gamma: &DVector<f64>) -> DMatrix<f64> {
    let n = gamma.len();
    let u = gamma / gamma.norm();
    let mut v = u.clone();
    v[n - 1] += 1.0;
    let vv = v.norm_squared();
    if vv < 1e-24 {
        // γ = -e_n
        let mut d = DMatrix::identity(n, n);
        d[(n - 1, n - 1)] = -1.0;
        return d;
    }
    let mut q = (&v * v.transpose()) * (2.0 / vv);
    for i in 0..n {
        q[(i, i)] -= 1.0;
    }
    q
}

/// Matrix of `Ad_g` in bivector coordinates (second compound of `g`).
pub fn adjoint_matrix(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let pairs: Vec<(usize, usize)> = bivector_pairs(n).collect();
    let nb = pairs.len();
    let mut r = DMatrix::zeros(nb, nb);
    for (col, &(i, j)) in pairs.iter().enumerate() {
        for (row, &(k, l)) in pairs.iter().enumerate() {
            r[(row, col)] = g[(k, i)] * g[(l, j)] - g[(l, i)] * g[(k, j)];
        }
    }
    r
}

/// Matrix of `ad_ω = [ω, ·]` in bivector coordinates.
pub fn ad_matrix(omega: &SkewMatrix) -> DMatrix<f64> {
    let n = omega.dim();
    let nb = bivector_dim(n);
    let w = omega.as_matrix();
    let mut a = DMatrix::zeros(nb, nb);
    for (col, (i, j)) in bivector_pairs(n).enumerate() {
        // [ω, e_i∧e_j] = (ωe_i)∧e_j + e_i∧(ωe_j)
        for (row, (k, l)) in bivector_pairs(n).enumerate() {
            let mut v = 0.0;
            if l == j {
                v += w[(k, i)];
            }
            if k == j {
                v -= w[(l, i)];
            }
            if k == i {
                v += w[(l, j)];
            }
            if l == i {
                v -= w[(k, j)];
            }
            a[(row, col)] = v;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn sample_rotation(n: usize, seed: f64) -> Rotation {
        let coords: Vec<f64> = (0..bivector_dim(n)).map(|k| ((k as f64 + 1.0) * seed).sin()).collect();
        Rotation::exp(&SkewMatrix::from_coords(n, &coords).unwrap())
    }

    fn sample_skew(n: usize, seed: f64) -> SkewMatrix {
        let coords: Vec<f64> = (0..bivector_dim(n)).map(|k| ((k as f64 + 0.3) * seed).cos()).collect();
        SkewMatrix::from_coords(n, &coords).unwrap()
    }

    #[test]
    fn wedge_on_basis_vectors() {
        let w = wedge(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(w, SkewMatrix::basis(3, 0, 1));
        assert!(wedge(&v(&[1.0, 0.0]), &v(&[0.0, 1.0, 0.0])).is_err());
    }

    #[test]
    fn bracket_of_basis_elements() {
        let e12 = SkewMatrix::basis(3, 0, 1);
        let e13 = SkewMatrix::basis(3, 0, 2);
        let e23 = SkewMatrix::basis(3, 1, 2);
        assert_eq!(ad(&e12, &e13).unwrap(), -e23);
    }

    #[test]
    fn projector_on_basis_elements() {
        let g = UnitVector::basis(4, 3);
        let e14 = SkewMatrix::basis(4, 0, 3);
        let e12 = SkewMatrix::basis(4, 0, 1);
        assert_eq!(proj_wedge_subspace(&g, &e14).unwrap(), e14);
        assert_eq!(proj_wedge_subspace(&g, &e12).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn householder_frame_maps_last_axis_to_gamma() {
        for gamma in [v(&[0.2, -0.4, 0.1, 0.7]), v(&[0.0, 0.0, 0.0, -1.0]), v(&[0.0, 0.0, 0.0, 1.0])] {
            let q = householder_frame(&gamma);
            assert!(orthogonality_defect(&q) < 1e-15);
            let u = &gamma / gamma.norm();
            assert!((q.column(3) - u).amax() < 1e-15);
        }
    }

    #[test]
    fn adjoint_matrix_matches_conjugation() {
        let g = sample_rotation(4, 0.7);
        let x = sample_skew(4, 1.3);
        let direct = adjoint_action(&g, &x).unwrap().coords();
        let via = adjoint_matrix(g.as_matrix()) * x.coords();
        assert!((direct - via).amax() < 1e-14);
    }

    #[test]
    fn ad_matrix_matches_bracket() {
        for n in 2..6 {
            let w = sample_skew(n, 0.9);
            let x = sample_skew(n, 2.1);
            let direct = w.bracket(&x).coords();
            let via = ad_matrix(&w) * x.coords();
            assert!((direct - via).amax() < 1e-14, "n = {n}");
        }
    }
}
