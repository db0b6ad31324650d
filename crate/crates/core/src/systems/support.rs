//! A ball rotating about its fixed centre and touching `N` symmetric balls at
//! space-fixed points `Γ_i`, with or without the no-twist (rubber) condition.
//! State: `g`, `ω`, `γ_1 … γ_N` with `γ_i = g⁻¹ Γ_i`.

use nalgebra::{DMatrix, DVector};

use super::trace::{evaluate, trace_power_coefficients};
use super::{anticommutator, check_flat, require, skew_at, the_group, vec_at};
use crate::error::{check_dim, Error, Result};
use crate::liecore::{bivector_dim, SkewMatrix, UnitVector};
use crate::operators::{min_eigenvalue, spd_factor, wedge_projector_matrix, InertiaOperator};
use crate::phase::{skew_names, vector_names, PhasePoint, PhaseVelocity, Quantity, StateLayout, System, SystemKind};

#[derive(Clone, Debug)]
pub struct SupportSystem {
    inertia: InertiaOperator,
    contacts: Vec<UnitVector>,
    d: Vec<f64>,
    rho: Vec<f64>,
    rubber: bool,
    /// Scalar shift of the total inertia (`Σ D_i` for rubber, else 0).
    shift: f64,
    /// Projector coefficients `c_i`.
    coeffs: Vec<f64>,
}

impl SupportSystem {
    pub fn new(
        inertia: InertiaOperator,
        contacts: Vec<UnitVector>,
        d: Vec<f64>,
        rho: Vec<f64>,
        rubber: bool,
    ) -> Result<Self> {
        let n = inertia.dim();
        inertia.factor()?;
        check_dim(contacts.len(), d.len())?;
        check_dim(contacts.len(), rho.len())?;
        for (i, c) in contacts.iter().enumerate() {
            check_dim(n, c.dim())?;
            require(d[i] >= 0.0, format!("D[{i}] must be nonnegative"))?;
            require(rho[i] != 0.0 && rho[i].is_finite(), format!("rho[{i}] must be nonzero"))?;
        }
        let (shift, coeffs) = if rubber {
            let shift = d.iter().sum();
            let coeffs = d.iter().zip(&rho).map(|(d, r)| d * (1.0 - r * r) / (r * r)).collect();
            (shift, coeffs)
        } else {
            (0.0, d.iter().zip(&rho).map(|(d, r)| d / (r * r)).collect())
        };
        let sys = Self { inertia, contacts, d, rho, rubber, shift, coeffs };
        // 𝓑 at the initial contacts must be positive definite.
        let gammas: Vec<DVector<f64>> = sys.contacts.iter().map(|c| c.as_vector().clone()).collect();
        let b = sys.total(&gammas);
        if spd_factor(&b).is_none() {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min_eigenvalue(&b) });
        }
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.inertia.dim()
    }

    pub fn is_rubber(&self) -> bool {
        self.rubber
    }

    pub fn contacts(&self) -> &[UnitVector] {
        &self.contacts
    }

    pub fn inertia(&self) -> &InertiaOperator {
        &self.inertia
    }

    pub fn masses(&self) -> &[f64] {
        &self.d
    }

    pub fn radii(&self) -> &[f64] {
        &self.rho
    }

    /// Projector coefficients: `D_i/ρ_i²`, or `D_i(1-ρ_i²)/ρ_i²` for rubber contact.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn flat_len(&self) -> usize {
        bivector_dim(self.n()) + self.n() * self.contacts.len()
    }

    pub fn state(&self, g: DMatrix<f64>, omega: &SkewMatrix) -> PhasePoint {
        let n = self.n();
        let nb = bivector_dim(n);
        let mut flat = DVector::zeros(self.flat_len());
        flat.rows_mut(0, nb).copy_from(&omega.coords());
        for (i, c) in self.contacts.iter().enumerate() {
            let gamma = g.transpose() * c.as_vector();
            flat.rows_mut(nb + i * n, n).copy_from(&gamma);
        }
        PhasePoint::new(vec![g], flat)
    }

    pub fn gammas(&self, x: &PhasePoint) -> Vec<DVector<f64>> {
        let n = self.n();
        let nb = bivector_dim(n);
        (0..self.contacts.len()).map(|i| vec_at(&x.flat, nb + i * n, n)).collect()
    }

    /// Total inertia matrix at the given body-frame contact points.
    pub fn total(&self, gammas: &[DVector<f64>]) -> DMatrix<f64> {
        let nb = bivector_dim(self.n());
        let mut b = self.inertia.matrix() + DMatrix::identity(nb, nb) * self.shift;
        for (c, gamma) in self.coeffs.iter().zip(gammas) {
            if *c != 0.0 {
                b += wedge_projector_matrix(gamma) * *c;
            }
        }
        b
    }

    /// `𝓑ω` as a matrix together with `X_i = γ_i γ_iᵀ`: the Lax matrix ingredients.
    pub fn lax_parts(&self, x: &PhasePoint) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
        let gammas = self.gammas(x);
        let nb = bivector_dim(self.n());
        let bw = self.total(&gammas) * x.flat.rows(0, nb);
        let bw = SkewMatrix::from_coord_vector(self.n(), &bw).expect("bivector length").into_matrix();
        let xs = gammas.iter().map(|g| g * g.transpose()).collect();
        (bw, xs)
    }
}

impl System for SupportSystem {
    fn kind(&self) -> SystemKind {
        if self.rubber {
            SystemKind::RubberSupport
        } else {
            SystemKind::Support
        }
    }

    fn layout(&self) -> StateLayout {
        let mut flat = skew_names("omega", self.n());
        for i in 0..self.contacts.len() {
            flat.extend(vector_names(&format!("gamma{}", i + 1), self.n()));
        }
        StateLayout { n: self.n(), groups: vec!["g".into()], flat }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        let nb = bivector_dim(n);
        check_flat(x, self.flat_len())?;
        the_group(x, n)?;
        let omega = skew_at(n, &x.flat, 0);
        let gammas = self.gammas(x);
        let b = self.total(&gammas);
        let factor = spd_factor(&b).ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: min_eigenvalue(&b) })?;
        let bw = SkewMatrix::from_coord_vector(n, &(&b * omega.coords()))?;
        // d/dt(𝓑ω) = [𝓑ω, ω], with 𝓑̇ω = Σ c_i (ωẊ_i + Ẋ_i ω) and Ẋ_i = [X_i, ω].
        let mut rhs = bw.bracket(&omega).into_matrix();
        let w = omega.as_matrix();
        let mut flat = DVector::zeros(self.flat_len());
        for (i, (c, gamma)) in self.coeffs.iter().zip(&gammas).enumerate() {
            let xi = gamma * gamma.transpose();
            if *c != 0.0 {
                let xdot = &xi * w - w * &xi;
                rhs -= anticommutator(w, &xdot) * *c;
            }
            flat.rows_mut(nb + i * n, n).copy_from(&(-(w * gamma)));
        }
        let rhs = SkewMatrix::skew_part(&rhs).coords();
        flat.rows_mut(0, nb).copy_from(&factor.solve(&rhs));
        Ok(PhaseVelocity { body: vec![omega], flat })
    }

    fn renormalize(&self, x: &mut PhasePoint) {
        let n = self.n();
        let nb = bivector_dim(n);
        for i in 0..self.contacts.len() {
            let mut seg = x.flat.rows_mut(nb + i * n, n);
            let norm = seg.norm();
            if norm > 0.0 {
                seg /= norm;
            }
        }
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let nb = bivector_dim(self.n());
        let w = x.flat.rows(0, nb).into_owned();
        Ok(0.5 * (self.total(&self.gammas(x)) * &w).dot(&w))
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        let g = the_group(x, self.n())?;
        let mut out = Vec::new();
        for (i, (c, gamma)) in self.contacts.iter().zip(self.gammas(x)).enumerate() {
            out.push((format!("unit[gamma{}]", i + 1), gamma.norm() - 1.0));
            let drift = (g.transpose() * c.as_vector() - &gamma).amax();
            out.push((format!("poisson[gamma{}]", i + 1), drift));
        }
        Ok(out)
    }

    fn extra_quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        match q {
            Quantity::MomentumNorm => {
                let nb = bivector_dim(self.n());
                let bw = self.total(&self.gammas(x)) * x.flat.rows(0, nb);
                Ok(DVector::from_element(1, bw.dot(&bw)))
            }
            Quantity::TraceIntegral { k, mu } => {
                check_dim(self.contacts.len(), mu.len())?;
                let (l0, xs) = self.lax_parts(x);
                Ok(DVector::from_element(1, evaluate(&trace_power_coefficients(&l0, &xs, *k), mu)))
            }
            Quantity::TraceCoefficients { k } => {
                let (l0, xs) = self.lax_parts(x);
                let coeffs = trace_power_coefficients(&l0, &xs, *k);
                Ok(DVector::from_iterator(coeffs.len(), coeffs.values().cloned()))
            }
            _ => Err(crate::phase::undefined(q, self.kind())),
        }
    }
}
