//! Symmetric operators on so(n), stored as dense matrices in the ordered
//! bivector basis.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix3, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::liecore::{
    adjoint_matrix, bivector_dim, bivector_pairs, wedge_unchecked, SkewMatrix, SubspaceBasis, UnitVector,
};

/// Relative symmetry tolerance for operator matrices.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Cholesky pivots below this (relative to the largest diagonal entry) count as singular.
pub const PIVOT_TOL: f64 = 1e-12;
/// Tolerance for "Y lies in the subspace".
pub const SUBSPACE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum InertiaKind {
    /// Diagonal in the bivector basis.
    Diagonal,
    Dense,
    /// `X∧Y ↦ AX∧AY - c X∧Y` for `A = diag(a)`.
    Special {
        a: DVector<f64>,
        c: f64,
    },
    /// `base + Σ d_i pr_{ℝⁿ∧γ_i}`.
    ProjectorAugmented {
        terms: Vec<(f64, UnitVector)>,
    },
    /// Symmetric, possibly indefinite (a right-invariant part Π).
    Symmetric,
}

#[derive(Clone)]
pub struct InertiaOperator {
    n: usize,
    kind: InertiaKind,
    matrix: DMatrix<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl fmt::Debug for InertiaOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InertiaOperator")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("matrix", &self.matrix)
            .finish()
    }
}

/// Cholesky factor of a symmetric matrix, or `None` when a pivot falls below [`PIVOT_TOL`].
pub fn spd_factor(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
    let chol = Cholesky::new(m.clone())?;
    let l = chol.l_dirty();
    let min_pivot = (0..m.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if m.nrows() > 0 && min_pivot <= PIVOT_TOL * scale {
        return None;
    }
    Some(chol)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

fn symmetry_residual(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Matrix of the projector onto `ℝⁿ ∧ γ` (γ not renormalized).
pub fn wedge_projector_matrix(gamma: &DVector<f64>) -> DMatrix<f64> {
    let n = gamma.len();
    let nb = bivector_dim(n);
    let mut p = DMatrix::zeros(nb, nb);
    for (col, (i, j)) in bivector_pairs(n).enumerate() {
        // pr(E_ij) = (E_ij γ) ∧ γ with E_ij γ = γ_j e_i - γ_i e_j
        let mut v = DVector::zeros(n);
        v[i] = gamma[j];
        v[j] = -gamma[i];
        p.set_column(col, &wedge_unchecked(&v, gamma).coords());
    }
    p
}

/// Bivector coordinates of `hat(v)` for `v ∈ ℝ³` are `S v`.
pub(crate) fn iso3_coordinate_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0])
}

impl InertiaOperator {
    fn build(n: usize, kind: InertiaKind, matrix: DMatrix<f64>) -> Self {
        let factor = spd_factor(&matrix);
        Self { n, kind, matrix, factor }
    }

    fn require_spd(self) -> Result<Self> {
        if self.factor.is_none() {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min_eigenvalue(&self.matrix) });
        }
        Ok(self)
    }

    pub fn identity(n: usize) -> Self {
        Self::build(n, InertiaKind::Diagonal, DMatrix::identity(bivector_dim(n), bivector_dim(n)))
    }

    pub fn scalar(n: usize, c: f64) -> Result<Self> {
        Self::diagonal(n, &vec![c; bivector_dim(n)])
    }

    /// Positive diagonal in the bivector basis, entries in `E_ij` order.
    pub fn diagonal(n: usize, d: &[f64]) -> Result<Self> {
        check_dim(bivector_dim(n), d.len())?;
        let m = DMatrix::from_diagonal(&DVector::from_column_slice(d));
        Self::build(n, InertiaKind::Diagonal, m).require_spd()
    }

    /// Dense symmetric positive-definite matrix in bivector coordinates.
    pub fn dense(n: usize, m: DMatrix<f64>) -> Result<Self> {
        let op = Self::symmetric(n, m)?;
        Self::build(n, InertiaKind::Dense, op.matrix).require_spd()
    }

    /// Symmetric matrix with no definiteness requirement.
    pub fn symmetric(n: usize, m: DMatrix<f64>) -> Result<Self> {
        let nb = bivector_dim(n);
        check_dim(nb, m.nrows())?;
        check_dim(nb, m.ncols())?;
        let residual = symmetry_residual(&m);
        if residual > SYMMETRY_TOL * m.amax().max(1.0) {
            return Err(Error::NotSymmetric { residual });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self::build(n, InertiaKind::Symmetric, sym))
    }

    /// `X∧Y ↦ AX∧AY - c X∧Y` with `A = diag(a)`; SPD iff `min_{i<j} a_i a_j > c`.
    pub fn special(a: &[f64], c: f64) -> Result<Self> {
        let n = a.len();
        if n < 2 {
            return Err(Error::InvalidParameter("special inertia needs n ≥ 2".into()));
        }
        if let Some(bad) = a.iter().find(|x| !(**x > 0.0)) {
            return Err(Error::InvalidParameter(format!("special inertia needs A > 0, got {bad}")));
        }
        let d: Vec<f64> = bivector_pairs(n).map(|(i, j)| a[i] * a[j] - c).collect();
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        let kind = InertiaKind::Special { a: DVector::from_column_slice(a), c };
        Ok(Self::build(n, kind, DMatrix::from_diagonal(&DVector::from_vec(d))))
    }

    /// `base + Σ d_i pr_{ℝⁿ∧γ_i}`; the sum must be positive definite.
    pub fn projector_augmented(base: &InertiaOperator, terms: &[(f64, UnitVector)]) -> Result<Self> {
        let mut m = base.matrix.clone();
        for (d, gamma) in terms {
            check_dim(base.n, gamma.dim())?;
            m += wedge_projector_matrix(gamma.as_vector()) * *d;
        }
        Self::build(base.n, InertiaKind::ProjectorAugmented { terms: terms.to_vec() }, m).require_spd()
    }

    /// The bivector operator corresponding to a 3×3 inertia tensor under the hat map.
    pub fn from_vector_inertia(i3: &Matrix3<f64>) -> Result<Self> {
        let s = iso3_coordinate_matrix();
        let m = DMatrix::from_iterator(3, 3, i3.iter().cloned());
        Self::dense(3, &s * m * s.transpose())
    }

    /// Inverse of [`InertiaOperator::from_vector_inertia`].
    pub fn to_vector_inertia(&self) -> Result<Matrix3<f64>> {
        check_dim(3, self.n)?;
        let s = iso3_coordinate_matrix();
        let m = s.transpose() * &self.matrix * s;
        Ok(Matrix3::from_iterator(m.iter().cloned()))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &InertiaKind {
        &self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `(A, c)` for the special kind.
    pub fn special_params(&self) -> Option<(&DVector<f64>, f64)> {
        match &self.kind {
            InertiaKind::Special { a, c } => Some((a, *c)),
            _ => None,
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.factor.is_some()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    pub fn apply(&self, x: &SkewMatrix) -> Result<SkewMatrix> {
        check_dim(self.n, x.dim())?;
        SkewMatrix::from_coord_vector(self.n, &self.apply_coords(&x.coords()))
    }

    pub fn apply_coords(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// `X` with `I X = Y`.
    pub fn solve(&self, y: &SkewMatrix) -> Result<SkewMatrix> {
        check_dim(self.n, y.dim())?;
        SkewMatrix::from_coord_vector(self.n, &self.solve_coords(&y.coords())?)
    }

    pub fn solve_coords(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.factor {
            Some(f) => Ok(f.solve(y)),
            None => Err(Error::NotPositiveDefinite { min_eigenvalue: self.min_eigenvalue() }),
        }
    }

    pub(crate) fn factor(&self) -> Result<&Cholesky<f64, Dyn>> {
        self.factor.as_ref().ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: self.min_eigenvalue() })
    }

    /// `⟨X, I X⟩`-style quadratic form `⟨I X, Y⟩`.
    pub fn form(&self, x: &SkewMatrix, y: &SkewMatrix) -> f64 {
        self.apply_coords(&x.coords()).dot(&y.coords())
    }

    /// Gram matrix `⟨I⁻¹ e_i, e_j⟩` on an orthonormal basis.
    pub fn restricted_inverse_gram(&self, basis: &SubspaceBasis) -> Result<DMatrix<f64>> {
        check_dim(self.n, basis.ambient_dim())?;
        let c = basis.coordinate_matrix();
        let y = self.factor()?.solve(&c);
        Ok(c.transpose() * y)
    }

    /// `det ⟨I⁻¹ e_i, e_j⟩`; 1 for the empty basis.
    pub fn restricted_inverse_det(&self, basis: &SubspaceBasis) -> Result<f64> {
        Ok(self.restricted_inverse_gram(basis)?.determinant())
    }

    /// `det ⟨I e_i, e_j⟩`, the determinant of the restriction `pr ∘ I ∘ pr`.
    pub fn restricted_det(&self, basis: &SubspaceBasis) -> Result<f64> {
        check_dim(self.n, basis.ambient_dim())?;
        let c = basis.coordinate_matrix();
        Ok((c.transpose() * &self.matrix * c).determinant())
    }

    /// Inverse of `pr ∘ I⁻¹ ∘ pr` on the subspace, applied to `y`.
    pub fn restricted_operator_inverse(&self, basis: &SubspaceBasis, y: &SkewMatrix) -> Result<SkewMatrix> {
        check_dim(self.n, y.dim())?;
        let residual = (y - &basis.project(y)).norm();
        if residual > SUBSPACE_TOL * y.norm().max(1.0) {
            return Err(Error::NotInSubspace { residual });
        }
        let gram = self.restricted_inverse_gram(basis)?;
        let f = spd_factor(&gram).ok_or(Error::Singular { what: "restricted inverse operator" })?;
        let x = f.solve(&basis.components(y));
        let out = basis.coordinate_matrix() * x;
        SkewMatrix::from_coord_vector(self.n, &out)
    }

    /// `self + other`, keeping whichever structure survives.
    pub fn sum(&self, other: &InertiaOperator) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let m = &self.matrix + &other.matrix;
        let kind = if self.kind == InertiaKind::Diagonal && other.kind == InertiaKind::Diagonal {
            InertiaKind::Diagonal
        } else {
            InertiaKind::Symmetric
        };
        Ok(Self::build(self.n, kind, m))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let kind = match self.kind {
            InertiaKind::Diagonal => InertiaKind::Diagonal,
            _ => InertiaKind::Symmetric,
        };
        Self::build(self.n, kind, &self.matrix * s)
    }

    /// `X ↦ I X + c X`.
    pub fn shifted(&self, c: f64) -> Self {
        let nb = self.matrix.nrows();
        let kind = match self.kind {
            InertiaKind::Diagonal => InertiaKind::Diagonal,
            _ => InertiaKind::Symmetric,
        };
        Self::build(self.n, kind, &self.matrix + DMatrix::identity(nb, nb) * c)
    }

    /// `Ad_{g⁻¹} ∘ I ∘ Ad_g`, the body-frame image of a space-fixed operator.
    pub fn conjugated_by_inverse(&self, g: &DMatrix<f64>) -> Self {
        let r = adjoint_matrix(g);
        Self::build(self.n, InertiaKind::Symmetric, conjugated_matrix(&self.matrix, &r))
    }
}

/// `Rᵀ M R`, symmetrized.
pub(crate) fn conjugated_matrix(m: &DMatrix<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let c = r.transpose() * m * r;
    (&c + c.transpose()) * 0.5
}

/// Which chart a [`MeasureDensity`] is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityChart {
    EulerTop,
    Lr,
    LplusR,
    Cotangent,
}

/// A density `μ` on a flat chart of some phase space.
#[derive(Clone)]
pub struct MeasureDensity {
    pub chart: DensityChart,
    pub label: String,
    density: Arc<dyn Fn(&DVector<f64>) -> Result<f64> + Send + Sync>,
}

impl fmt::Debug for MeasureDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureDensity").field("chart", &self.chart).field("label", &self.label).finish()
    }
}

impl MeasureDensity {
    pub fn new(
        chart: DensityChart,
        label: impl Into<String>,
        density: impl Fn(&DVector<f64>) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { chart, label: label.into(), density: Arc::new(density) }
    }

    pub fn constant(chart: DensityChart, c: f64) -> Self {
        Self::new(chart, format!("{c}"), move |_| Ok(c))
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        (self.density)(x)
    }

    /// `c μ`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.density.clone();
        Self { chart: self.chart, label: format!("{c}*{}", self.label), density: Arc::new(move |x| Ok(c * inner(x)?)) }
    }
}
