//! The `so(n)`-valued Chaplygin sphere: `𝐤̇ = [𝐤, ω]`, `γ̇ = [γ, ω]` with
//! `𝐤 = Iω + mρ²[[γ, ω], γ]` and `γ` in an adjoint orbit. State `(ω, γ) ∈ so(n)²`.

use nalgebra::{DMatrix, DVector};

use super::{check_flat, require, skew_at};
use crate::error::{Error, Result};
use crate::liecore::{ad_matrix, bivector_dim, SkewMatrix};
use crate::operators::{min_eigenvalue, spd_factor, InertiaOperator};
use crate::phase::{skew_names, PhasePoint, PhaseVelocity, Quantity, StateLayout, System, SystemKind};

#[derive(Clone, Debug)]
pub struct GsrSystem {
    inertia: InertiaOperator,
    m: f64,
    rho: f64,
}

impl GsrSystem {
    pub fn new(inertia: InertiaOperator, m: f64, rho: f64) -> Result<Self> {
        require(m > 0.0, format!("mass must be positive, got {m}"))?;
        require(rho != 0.0 && rho.is_finite(), format!("radius must be nonzero, got {rho}"))?;
        inertia.factor()?;
        Ok(Self { inertia, m, rho })
    }

    pub fn n(&self) -> usize {
        self.inertia.dim()
    }

    pub fn inertia(&self) -> &InertiaOperator {
        &self.inertia
    }

    pub fn m_rho2(&self) -> f64 {
        self.m * self.rho * self.rho
    }

    pub fn state(&self, omega: &SkewMatrix, gamma: &SkewMatrix) -> PhasePoint {
        let nb = bivector_dim(self.n());
        let mut flat = DVector::zeros(2 * nb);
        flat.rows_mut(0, nb).copy_from(&omega.coords());
        flat.rows_mut(nb, nb).copy_from(&gamma.coords());
        PhasePoint::flat_only(flat)
    }

    fn split(&self, x: &PhasePoint) -> Result<(SkewMatrix, SkewMatrix)> {
        let n = self.n();
        check_flat(x, 2 * bivector_dim(n))?;
        Ok((skew_at(n, &x.flat, 0), skew_at(n, &x.flat, bivector_dim(n))))
    }

    /// `𝓑 = I - mρ² ad_γ²`, so that `𝓑ω = Iω + mρ²[[γ, ω], γ]`.
    pub fn total(&self, gamma: &SkewMatrix) -> DMatrix<f64> {
        let ad = ad_matrix(gamma);
        self.inertia.matrix() - &ad * &ad * self.m_rho2()
    }

    pub fn momentum(&self, x: &PhasePoint) -> Result<SkewMatrix> {
        let (omega, gamma) = self.split(x)?;
        SkewMatrix::from_coord_vector(self.n(), &(self.total(&gamma) * omega.coords()))
    }
}

impl System for GsrSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::Gsr
    }

    fn layout(&self) -> StateLayout {
        let mut flat = skew_names("omega", self.n());
        flat.extend(skew_names("gamma", self.n()));
        StateLayout { n: self.n(), groups: Vec::new(), flat }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let nb = bivector_dim(self.n());
        let (omega, gamma) = self.split(x)?;
        let b = self.total(&gamma);
        let f = spd_factor(&b).ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: min_eigenvalue(&b) })?;
        let k = SkewMatrix::from_coord_vector(self.n(), &(&b * omega.coords()))?;
        let gdot = gamma.bracket(&omega);
        // 𝓑̇ω = mρ²([[γ̇, ω], γ] + [[γ, ω], γ̇])
        let bdot_w = (gdot.bracket(&omega).bracket(&gamma) + gamma.bracket(&omega).bracket(&gdot)) * self.m_rho2();
        let rhs = (k.bracket(&omega) - bdot_w).coords();
        let mut flat = DVector::zeros(2 * nb);
        flat.rows_mut(0, nb).copy_from(&f.solve(&rhs));
        flat.rows_mut(nb, nb).copy_from(&gdot.coords());
        Ok(PhaseVelocity { body: Vec::new(), flat })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let (omega, gamma) = self.split(x)?;
        Ok(0.5 * (self.total(&gamma) * omega.coords()).dot(&omega.coords()))
    }

    fn extra_quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        match q {
            Quantity::MomentumNorm => {
                let k = self.momentum(x)?;
                Ok(DVector::from_element(1, k.dot(&k)))
            }
            Quantity::OrbitNorm => {
                let (_, gamma) = self.split(x)?;
                Ok(DVector::from_element(1, gamma.dot(&gamma)))
            }
            _ => Err(crate::phase::undefined(q, self.kind())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commuting_isotropic_state_is_stationary() {
        let sys = GsrSystem::new(InertiaOperator::scalar(4, 1.5).unwrap(), 0.7, 1.1).unwrap();
        let gamma = SkewMatrix::from_coords(4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let omega = SkewMatrix::from_coords(4, &[0.3, 0.0, 0.0, 0.0, 0.0, -0.8]).unwrap();
        assert!(gamma.bracket(&omega).max_abs() < 1e-15);
        let v = sys.eval(&sys.state(&omega, &gamma)).unwrap();
        assert!(v.flat.amax() < 1e-14);
    }
}
