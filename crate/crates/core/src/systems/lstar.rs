//! Geodesic flow on `S^{n-1}` of
//! `L* = ½[(Aγ′,γ′)(Aγ,γ) - (Aγ,γ′)²] / (Aγ,γ)`, state `(γ, γ′) ∈ ℝ²ⁿ`.
//!
//! [`LStarSystem::unscaled`] drops the `1/(Aγ,γ)` factor. That Lagrangian is
//! the reduced Lagrangian itself and is not the time-changed flow; it is kept
//! for comparison.

use nalgebra::{DMatrix, DVector};

use super::{check_flat, require, vec_at};
use crate::error::{check_dim, Error, Result};
use crate::phase::{vector_names, PhasePoint, PhaseVelocity, Quantity, StateLayout, System, SystemKind};

#[derive(Clone, Debug)]
pub struct LStarSystem {
    a: DVector<f64>,
    conformal: bool,
}

impl LStarSystem {
    pub fn new(a: &[f64]) -> Result<Self> {
        Self::build(a, true)
    }

    pub fn unscaled(a: &[f64]) -> Result<Self> {
        Self::build(a, false)
    }

    fn build(a: &[f64], conformal: bool) -> Result<Self> {
        require(a.len() >= 2, "need n >= 2")?;
        require(a.iter().all(|x| *x > 0.0 && x.is_finite()), "A must have positive entries")?;
        Ok(Self { a: DVector::from_column_slice(a), conformal })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn is_conformal(&self) -> bool {
        self.conformal
    }

    pub fn state(&self, gamma: &DVector<f64>, dgamma: &DVector<f64>) -> PhasePoint {
        let mut flat = DVector::zeros(2 * gamma.len());
        flat.rows_mut(0, gamma.len()).copy_from(gamma);
        flat.rows_mut(gamma.len(), dgamma.len()).copy_from(dgamma);
        PhasePoint::flat_only(flat)
    }

    /// `(Aγ, γ)`.
    pub fn s(&self, gamma: &DVector<f64>) -> f64 {
        self.a.component_mul(gamma).dot(gamma)
    }

    /// Matched initial data for a cotangent state with velocity `γ̇ = ξ`:
    /// `dτ = dt/√(Aγ,γ)` gives `γ′ = √(Aγ,γ) ξ`.
    pub fn from_time_velocity(&self, gamma: &DVector<f64>, xi: &DVector<f64>) -> Result<PhasePoint> {
        check_dim(self.n(), gamma.len())?;
        let s = self.s(gamma);
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!("(Aγ,γ) = {s} is not positive")));
        }
        Ok(self.state(gamma, &(xi * s.sqrt())))
    }

    fn split(&self, x: &PhasePoint) -> Result<(DVector<f64>, DVector<f64>)> {
        let n = self.n();
        check_flat(x, 2 * n)?;
        Ok((vec_at(&x.flat, 0, n), vec_at(&x.flat, n, n)))
    }

    pub fn lagrangian(&self, gamma: &DVector<f64>, dgamma: &DVector<f64>) -> f64 {
        let s = self.s(gamma);
        let c = self.a.component_mul(gamma).dot(dgamma);
        let q = self.a.component_mul(dgamma).dot(dgamma);
        let lit = 0.5 * (q * s - c * c);
        if self.conformal {
            lit / s
        } else {
            lit
        }
    }

    /// `γ″` from the Euler-Lagrange equations with the multiplier of `|γ| = 1`.
    pub fn acceleration(&self, gamma: &DVector<f64>, dgamma: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n();
        let a_mat = DMatrix::from_diagonal(&self.a);
        let a = self.a.component_mul(gamma);
        let ad = self.a.component_mul(dgamma);
        let s = a.dot(gamma);
        let c = a.dot(dgamma);
        let q = ad.dot(dgamma);
        let (h, rhs) = if self.conformal {
            // H = A - aaᵀ/s; Hγ″ = νγ + (2L*/s) a
            let lstar = 0.5 * (q * s - c * c) / s;
            (a_mat - &a * a.transpose() / s, &a * (2.0 * lstar / s))
        } else {
            // H = sA - aaᵀ; Hγ″ = νγ + 2(Aγ′,γ′) a - 2c Aγ′
            (a_mat * s - &a * a.transpose(), &a * (2.0 * q) - &ad * (2.0 * c))
        };
        let mut kkt = DMatrix::zeros(n + 1, n + 1);
        kkt.view_mut((0, 0), (n, n)).copy_from(&h);
        for i in 0..n {
            kkt[(i, n)] = -gamma[i];
            kkt[(n, i)] = gamma[i];
        }
        let mut b = DVector::zeros(n + 1);
        b.rows_mut(0, n).copy_from(&rhs);
        b[n] = -dgamma.dot(dgamma);
        let sol = kkt.lu().solve(&b).ok_or(Error::Singular { what: "L* Euler-Lagrange system" })?;
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular { what: "L* Euler-Lagrange system" });
        }
        Ok(sol.rows(0, n).into_owned())
    }
}

impl System for LStarSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::LstarGeodesic
    }

    fn layout(&self) -> StateLayout {
        let mut flat = vector_names("gamma", self.n());
        flat.extend(vector_names("dgamma", self.n()));
        StateLayout { n: self.n(), groups: Vec::new(), flat }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        let (gamma, dgamma) = self.split(x)?;
        let acc = self.acceleration(&gamma, &dgamma)?;
        let mut flat = DVector::zeros(2 * n);
        flat.rows_mut(0, n).copy_from(&dgamma);
        flat.rows_mut(n, n).copy_from(&acc);
        Ok(PhaseVelocity { body: Vec::new(), flat })
    }

    fn renormalize(&self, x: &mut PhasePoint) {
        let n = self.n();
        let norm = x.flat.rows(0, n).norm();
        if norm > 0.0 {
            let u = x.flat.rows(0, n) / norm;
            let v = x.flat.rows(n, n).into_owned();
            let v = &v - &u * u.dot(&v);
            x.flat.rows_mut(0, n).copy_from(&u);
            x.flat.rows_mut(n, n).copy_from(&v);
        }
    }

    /// The Lagrangian is quadratic in `γ′`, so the energy equals `L*`.
    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let (gamma, dgamma) = self.split(x)?;
        Ok(self.lagrangian(&gamma, &dgamma))
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        let (gamma, dgamma) = self.split(x)?;
        Ok(vec![("unit[gamma]".into(), gamma.norm() - 1.0), ("gamma.dgamma".into(), gamma.dot(&dgamma))])
    }

    fn extra_quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        match q {
            Quantity::LStarEnergy => Ok(DVector::from_element(1, self.energy(x)?)),
            _ => Err(crate::phase::undefined(q, self.kind())),
        }
    }
}
