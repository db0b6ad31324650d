//! The rubber Chaplygin ball reduced to `T*S^{n-1}` in the redundant chart `(γ, p) ∈ ℝ²ⁿ`.
//!
//! The Legendre transform is `p = mρ²γ̇ - IΦ·γ` with `Φ = γ∧γ̇`; the flow is
//! `γ̇ = -Φγ`, `ṗ = -Φp`.

use nalgebra::{DMatrix, DVector};

use super::{check_flat, require, vec_at};
use crate::error::{check_dim, Error, Result};
use crate::liecore::{householder_frame, wedge_unchecked, SkewMatrix};
use crate::operators::{spd_factor, InertiaOperator};
use crate::phase::{vector_names, PhasePoint, PhaseVelocity, StateLayout, System, SystemKind};

#[derive(Clone, Debug)]
pub struct CotangentSystem {
    inertia: InertiaOperator,
    m: f64,
    rho: f64,
    /// `J = I + mρ² Id`.
    total: InertiaOperator,
}

impl CotangentSystem {
    pub fn new(inertia: InertiaOperator, m: f64, rho: f64) -> Result<Self> {
        require(m > 0.0, format!("mass must be positive, got {m}"))?;
        require(rho > 0.0, format!("radius must be positive, got {rho}"))?;
        let total = inertia.shifted(m * rho * rho);
        total.factor()?;
        Ok(Self { inertia, m, rho, total })
    }

    /// Special inertia `I(E_ij) = (A_i A_j - mρ²) E_ij`, so that `J(E_ij) = A_i A_j E_ij`.
    pub fn special(a: &[f64], m: f64, rho: f64) -> Result<Self> {
        Self::new(InertiaOperator::special(a, m * rho * rho)?, m, rho)
    }

    pub fn n(&self) -> usize {
        self.inertia.dim()
    }

    pub fn inertia(&self) -> &InertiaOperator {
        &self.inertia
    }

    pub fn total(&self) -> &InertiaOperator {
        &self.total
    }

    pub fn m_rho2(&self) -> f64 {
        self.m * self.rho * self.rho
    }

    pub fn state(&self, gamma: &DVector<f64>, p: &DVector<f64>) -> PhasePoint {
        let mut flat = DVector::zeros(2 * gamma.len());
        flat.rows_mut(0, gamma.len()).copy_from(gamma);
        flat.rows_mut(gamma.len(), p.len()).copy_from(p);
        PhasePoint::flat_only(flat)
    }

    /// Legendre transform of a tangent velocity `γ̇ = ξ`.
    pub fn momentum_of_velocity(&self, gamma: &DVector<f64>, xi: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.n(), gamma.len())?;
        check_dim(self.n(), xi.len())?;
        let phi = wedge_unchecked(gamma, xi);
        Ok(xi * self.m_rho2() - self.inertia.apply(&phi)?.apply(gamma))
    }

    /// Projects a group state `(g, ω)` of the rubber ball: `γ = g⁻¹e_n`, `p = -𝐤γ`.
    pub fn from_group(&self, g: &DMatrix<f64>, omega: &SkewMatrix) -> Result<PhasePoint> {
        let n = self.n();
        check_dim(n, g.nrows())?;
        let gamma = g.row(n - 1).transpose();
        let gamma = &gamma / gamma.norm();
        let k = self.inertia.apply(omega)?.as_matrix()
            + crate::liecore::proj_wedge_raw(&gamma, omega).into_matrix() * self.m_rho2();
        let p = -(k * &gamma);
        Ok(self.state(&gamma, &p))
    }

    /// Solves the Legendre transform for `γ̇ ∈ T_γS^{n-1}`.
    pub fn velocity(&self, gamma: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n();
        let norm = gamma.norm();
        if !(norm > 0.0) {
            return Err(Error::NotUnit { norm });
        }
        let u = gamma / norm;
        let q = householder_frame(&u);
        let dirs: Vec<SkewMatrix> = (0..n - 1).map(|a| wedge_unchecked(&u, &q.column(a).into_owned())).collect();
        let images: Vec<SkewMatrix> = dirs.iter().map(|d| self.total.apply(d)).collect::<Result<_>>()?;
        let mut mat = DMatrix::zeros(n - 1, n - 1);
        let mut rhs = DVector::zeros(n - 1);
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                mat[(a, b)] = images[a].dot(&dirs[b]);
            }
            rhs[a] = q.column(a).dot(p);
        }
        let f = spd_factor(&mat).ok_or(Error::Singular { what: "Legendre transform" })?;
        let x = f.solve(&rhs);
        Ok(q.columns(0, n - 1) * x)
    }

    fn split(&self, x: &PhasePoint) -> Result<(DVector<f64>, DVector<f64>)> {
        let n = self.n();
        check_flat(x, 2 * n)?;
        Ok((vec_at(&x.flat, 0, n), vec_at(&x.flat, n, n)))
    }

    /// `Φ = γ∧γ̇` at the given state.
    pub fn phi(&self, x: &PhasePoint) -> Result<SkewMatrix> {
        let (gamma, p) = self.split(x)?;
        let xi = self.velocity(&gamma, &p)?;
        Ok(wedge_unchecked(&gamma, &xi))
    }
}

impl System for CotangentSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::Cotangent
    }

    fn layout(&self) -> StateLayout {
        let mut flat = vector_names("gamma", self.n());
        flat.extend(vector_names("p", self.n()));
        StateLayout { n: self.n(), groups: Vec::new(), flat }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        let (gamma, p) = self.split(x)?;
        let xi = self.velocity(&gamma, &p)?;
        let phi = wedge_unchecked(&gamma, &xi);
        let mut flat = DVector::zeros(2 * n);
        flat.rows_mut(0, n).copy_from(&(-phi.apply(&gamma)));
        flat.rows_mut(n, n).copy_from(&(-phi.apply(&p)));
        Ok(PhaseVelocity { body: Vec::new(), flat })
    }

    fn renormalize(&self, x: &mut PhasePoint) {
        let n = self.n();
        let norm = x.flat.rows(0, n).norm();
        if norm > 0.0 {
            let u = x.flat.rows(0, n) / norm;
            let p = x.flat.rows(n, n).into_owned();
            let p = &p - &u * u.dot(&p);
            x.flat.rows_mut(0, n).copy_from(&u);
            x.flat.rows_mut(n, n).copy_from(&p);
        }
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let phi = self.phi(x)?;
        Ok(0.5 * self.total.form(&phi, &phi))
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        let (gamma, p) = self.split(x)?;
        Ok(vec![("unit[gamma]".into(), gamma.norm() - 1.0), ("gamma.p".into(), gamma.dot(&p))])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_round_trip() {
        let inertia = InertiaOperator::diagonal(4, &[1.0, 1.3, 0.7, 2.1, 1.6, 0.9]).unwrap();
        let sys = CotangentSystem::new(inertia, 0.8, 0.6).unwrap();
        let gamma = DVector::from_vec(vec![0.2, -0.4, 0.1, 0.8]).normalize();
        let raw = DVector::from_vec(vec![0.5, 0.3, -0.7, 0.2]);
        let xi = &raw - &gamma * gamma.dot(&raw);
        let p = sys.momentum_of_velocity(&gamma, &xi).unwrap();
        assert!(gamma.dot(&p).abs() < 1e-14);
        let back = sys.velocity(&gamma, &p).unwrap();
        assert!((back - xi).amax() < 1e-13);
    }

    #[test]
    fn isotropic_inverse_is_explicit() {
        let c = 1.7;
        let sys = CotangentSystem::new(InertiaOperator::scalar(3, c).unwrap(), 2.0, 0.5).unwrap();
        let gamma = DVector::from_vec(vec![0.6, 0.0, 0.8]);
        let p = DVector::from_vec(vec![0.8, 0.3, -0.6]);
        let xi = sys.velocity(&gamma, &p).unwrap();
        assert!((xi - &p / (c + 0.5)).amax() < 1e-14);
    }
}
