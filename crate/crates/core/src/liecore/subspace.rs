use nalgebra::{DMatrix, DVector};

use super::skew::{bivector_dim, bivector_pairs, SkewMatrix};
use super::{householder_frame, wedge_unchecked};
use crate::error::{check_dim, Error, Result};
use crate::liecore::{Rotation, UnitVector};

/// Residual norm below which a generator counts as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Tolerance on `⟨e_i, e_j⟩ = δ_ij` for a validated basis.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Orthonormal basis (for `⟨X,Y⟩ = -½ tr XY`) of a linear subspace of so(n).
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    n: usize,
    elements: Vec<SkewMatrix>,
}

/// Result of orthonormalizing a generator list.
#[derive(Clone, Debug)]
pub struct BasisReport {
    pub basis: SubspaceBasis,
    /// Indices of generators dropped as dependent on their predecessors.
    pub dropped: Vec<usize>,
}

impl SubspaceBasis {
    pub fn empty(n: usize) -> Self {
        Self { n, elements: Vec::new() }
    }

    /// The whole algebra spanned by `{E_ij}`.
    pub fn full(n: usize) -> Self {
        Self { n, elements: bivector_pairs(n).map(|(i, j)| SkewMatrix::basis(n, i, j)).collect() }
    }

    /// Validates that `elements` is already orthonormal.
    pub fn from_orthonormal(n: usize, elements: Vec<SkewMatrix>) -> Result<Self> {
        for e in &elements {
            check_dim(n, e.dim())?;
        }
        for (a, x) in elements.iter().enumerate() {
            for (b, y) in elements.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                let residual = (x.dot(y) - target).abs();
                if residual > ORTHONORMAL_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "basis elements {a} and {b} are not orthonormal (residual {residual:e})"
                    )));
                }
            }
        }
        Ok(Self { n, elements })
    }

    /// Gram-Schmidt (two passes) in the Killing-proportional product.
    pub fn orthonormal_basis_of(n: usize, generators: &[SkewMatrix]) -> Result<BasisReport> {
        let mut elements: Vec<SkewMatrix> = Vec::new();
        let mut dropped = Vec::new();
        for (idx, g) in generators.iter().enumerate() {
            check_dim(n, g.dim())?;
            let scale = g.norm().max(1.0);
            let mut r = g.clone();
            for _ in 0..2 {
                for e in &elements {
                    r = &r - &(e * r.dot(e));
                }
            }
            let norm = r.norm();
            if norm < RANK_TOL * scale {
                dropped.push(idx);
            } else {
                elements.push(r * (1.0 / norm));
            }
        }
        Ok(BasisReport { basis: Self { n, elements }, dropped })
    }

    /// Orthonormal basis of the orthogonal complement, completed from `{E_ij}`.
    pub fn complement(&self) -> SubspaceBasis {
        let mut all = self.elements.clone();
        let mut comp = Vec::new();
        let target = bivector_dim(self.n) - self.elements.len();
        // Largest residuals first keeps the completion well conditioned.
        let mut candidates: Vec<SkewMatrix> =
            bivector_pairs(self.n).map(|(i, j)| SkewMatrix::basis(self.n, i, j)).collect();
        while comp.len() < target {
            let mut best: Option<(usize, SkewMatrix, f64)> = None;
            for (k, c) in candidates.iter().enumerate() {
                let mut r = c.clone();
                for _ in 0..2 {
                    for e in &all {
                        r = &r - &(e * r.dot(e));
                    }
                }
                let norm = r.norm();
                if best.as_ref().is_none_or(|b| norm > b.2 + 1e-12) {
                    best = Some((k, r, norm));
                }
            }
            let (k, r, norm) = best.expect("complement candidates exhausted");
            candidates.remove(k);
            let e = r * (1.0 / norm);
            all.push(e.clone());
            comp.push(e);
        }
        Self { n: self.n, elements: comp }
    }

    /// Subspace `ℝⁿ ∧ γ`, with basis `{q_a ∧ γ}` from the frame of [`householder_frame`].
    pub fn wedge_with(gamma: &UnitVector) -> SubspaceBasis {
        let n = gamma.dim();
        let q = householder_frame(gamma.as_vector());
        let g = q.column(n - 1).into_owned();
        let elements = (0..n - 1).map(|a| wedge_unchecked(&q.column(a).into_owned(), &g)).collect();
        Self { n, elements }
    }

    /// Orthogonal complement of `ℝⁿ ∧ γ`: the isotropy algebra so(n-1) of `γ`.
    pub fn stabilizer_of(gamma: &UnitVector) -> SubspaceBasis {
        let n = gamma.dim();
        let q = householder_frame(gamma.as_vector());
        let cols: Vec<DVector<f64>> = (0..n - 1).map(|a| q.column(a).into_owned()).collect();
        let mut elements = Vec::with_capacity(bivector_dim(n - 1));
        for a in 0..cols.len() {
            for b in a + 1..cols.len() {
                elements.push(wedge_unchecked(&cols[a], &cols[b]));
            }
        }
        Self { n, elements }
    }

    /// Orthonormal basis of the sum of several subspaces.
    pub fn sum(n: usize, parts: &[&SubspaceBasis]) -> Result<SubspaceBasis> {
        let gens: Vec<SkewMatrix> = parts.iter().flat_map(|p| p.elements.iter().cloned()).collect();
        Ok(Self::orthonormal_basis_of(n, &gens)?.basis)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[SkewMatrix] {
        &self.elements
    }

    /// Orthogonal projection `Σ ⟨e_i, X⟩ e_i`.
    pub fn project(&self, x: &SkewMatrix) -> SkewMatrix {
        let mut out = SkewMatrix::zeros(self.n);
        for e in &self.elements {
            out += &(e * e.dot(x));
        }
        out
    }

    /// Components `⟨e_i, X⟩`.
    pub fn components(&self, x: &SkewMatrix) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.elements.iter().map(|e| e.dot(x)))
    }

    /// Basis elements as columns of bivector coordinates.
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        let nb = bivector_dim(self.n);
        let mut m = DMatrix::zeros(nb, self.dim());
        for (k, e) in self.elements.iter().enumerate() {
            m.set_column(k, &e.coords());
        }
        m
    }

    /// `Ad_{g⁻¹}` applied to each element; the image stays orthonormal.
    pub fn conjugate_by_inverse(&self, g: &Rotation) -> SubspaceBasis {
        let gm = g.as_matrix();
        let elements =
            self.elements.iter().map(|e| SkewMatrix::skew_part(&(gm.transpose() * e.as_matrix() * gm))).collect();
        Self { n: self.n, elements }
    }

    /// `max |⟨e_i, f_j⟩|` between two bases.
    pub fn max_overlap(&self, other: &SubspaceBasis) -> f64 {
        let mut worst: f64 = 0.0;
        for e in &self.elements {
            for f in &other.elements {
                worst = worst.max(e.dot(f).abs());
            }
        }
        worst
    }
}
