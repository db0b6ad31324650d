//! The rubber Chaplygin ball in ℝⁿ rolling on the hyperplane `x_n = 0`.
//!
//! With `γ = g⁻¹ e_n` the Lagrangian is `½⟨𝓑ω, ω⟩`, `𝓑 = I + mρ² pr_{ℝⁿ∧γ}`,
//! and the no-twist condition `ω ∈ ℝⁿ∧γ` is the right-invariant constraint
//! `⟨Ω, 𝔨⟩ = 0` for `𝔨 = so(n-1)` fixed in space.

use nalgebra::{DMatrix, DVector};

use super::multipliers::{body_covectors, pure_rows, solve_multipliers};
use super::{anticommutator, check_flat, require, skew_at, the_group};
use crate::error::{Error, Result};
use crate::liecore::{adjoint_matrix, bivector_dim, SkewMatrix, SubspaceBasis, UnitVector};
use crate::operators::{min_eigenvalue, spd_factor, wedge_projector_matrix, InertiaOperator};
use crate::phase::{skew_names, PhasePoint, PhaseVelocity, StateLayout, System, SystemKind};

#[derive(Clone, Debug)]
pub struct RubberChaplyginSystem {
    inertia: InertiaOperator,
    m: f64,
    rho: f64,
    /// `so(n-1) = span{E_ab : a < b < n}` in the space frame.
    twist: SubspaceBasis,
}

impl RubberChaplyginSystem {
    pub fn new(inertia: InertiaOperator, m: f64, rho: f64) -> Result<Self> {
        require(m > 0.0, format!("mass must be positive, got {m}"))?;
        require(rho > 0.0, format!("radius must be positive, got {rho}"))?;
        inertia.factor()?;
        let twist = SubspaceBasis::stabilizer_of(&UnitVector::basis(inertia.dim(), inertia.dim() - 1));
        Ok(Self { inertia, m, rho, twist })
    }

    pub fn n(&self) -> usize {
        self.inertia.dim()
    }

    pub fn inertia(&self) -> &InertiaOperator {
        &self.inertia
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn radius(&self) -> f64 {
        self.rho
    }

    pub fn m_rho2(&self) -> f64 {
        self.m * self.rho * self.rho
    }

    pub fn state(&self, g: DMatrix<f64>, omega: &SkewMatrix) -> PhasePoint {
        PhasePoint::new(vec![g], omega.coords())
    }

    /// `γ = g⁻¹ e_n`, normalized.
    pub fn gamma(&self, g: &DMatrix<f64>) -> DVector<f64> {
        let n = self.n();
        let v = g.row(n - 1).transpose();
        let norm = v.norm();
        v / norm
    }

    /// Total inertia `𝓑 = I + mρ² pr_{ℝⁿ∧γ}`.
    pub fn total(&self, gamma: &DVector<f64>) -> DMatrix<f64> {
        self.inertia.matrix() + wedge_projector_matrix(gamma) * self.m_rho2()
    }

    /// `𝐤 = Iω + mρ² pr_{ℝⁿ∧γ} ω`.
    pub fn momentum(&self, x: &PhasePoint) -> Result<SkewMatrix> {
        let g = the_group(x, self.n())?;
        SkewMatrix::from_coord_vector(self.n(), &(self.total(&self.gamma(g)) * &x.flat))
    }

    /// `ω̇` and the body reaction `λ₀ ∈ 𝔨^γ`.
    pub fn accel_and_reaction(&self, g: &DMatrix<f64>, omega: &SkewMatrix) -> Result<(DVector<f64>, DVector<f64>)> {
        let gamma = self.gamma(g);
        let b = self.total(&gamma);
        let factor = spd_factor(&b).ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: min_eigenvalue(&b) })?;
        let k = SkewMatrix::from_coord_vector(self.n(), &(&b * omega.coords()))?;
        let w = omega.as_matrix();
        let x = &gamma * gamma.transpose();
        let xdot = &x * w - w * &x;
        let force = k.bracket(omega).into_matrix() - anticommutator(w, &xdot) * self.m_rho2();
        let force = SkewMatrix::skew_part(&force).coords();
        let rows = pure_rows(&body_covectors(g, &self.twist));
        let sol = solve_multipliers(&factor, &force, &rows, &[], None)?;
        Ok((sol.body_accel, sol.reaction))
    }

    /// `‖pr_{𝔨^γ} ω‖`.
    pub fn twist_residual(&self, x: &PhasePoint) -> Result<f64> {
        let g = the_group(x, self.n())?;
        let big_omega = adjoint_matrix(g) * &x.flat;
        Ok((self.twist.coordinate_matrix().transpose() * big_omega).norm())
    }
}

impl System for RubberChaplyginSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::RubberChaplygin
    }

    fn layout(&self) -> StateLayout {
        StateLayout { n: self.n(), groups: vec!["g".into()], flat: skew_names("omega", self.n()) }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        check_flat(x, bivector_dim(n))?;
        let g = the_group(x, n)?;
        let omega = skew_at(n, &x.flat, 0);
        let (accel, _) = self.accel_and_reaction(g, &omega)?;
        Ok(PhaseVelocity { body: vec![omega], flat: accel })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let g = the_group(x, self.n())?;
        Ok(0.5 * (self.total(&self.gamma(g)) * &x.flat).dot(&x.flat))
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        Ok(vec![("ch-rubber".into(), self.twist_residual(x)?)])
    }
}
