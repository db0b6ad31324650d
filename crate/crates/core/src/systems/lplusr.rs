//! L+R systems `𝓑 = I + Π^g`, `Π^g = Ad_{g⁻¹} Π⁰ Ad_g`, in two flavours:
//! the nonholonomic flow `d/dt(𝓑ω) = [𝓑ω, ω]` and the geodesic flow of the
//! metric `½⟨𝓑ω, ω⟩`.

use nalgebra::{DMatrix, DVector};

use super::{check_flat, skew_at, the_group};
use crate::error::{check_dim, Error, Result};
use crate::liecore::{adjoint_matrix, bivector_dim, SkewMatrix};
use crate::operators::{conjugated_matrix, spd_factor, InertiaOperator};
use crate::phase::{skew_names, PhasePoint, PhaseVelocity, Quantity, StateLayout, System, SystemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LplusRMode {
    Nonholonomic,
    Geodesic,
}

#[derive(Clone, Debug)]
pub struct LplusRSystem {
    inertia: InertiaOperator,
    /// Space-fixed right-invariant part; may be indefinite.
    pi0: InertiaOperator,
    mode: LplusRMode,
}

impl LplusRSystem {
    pub fn new(inertia: InertiaOperator, pi0: InertiaOperator, mode: LplusRMode) -> Result<Self> {
        check_dim(inertia.dim(), pi0.dim())?;
        inertia.factor()?;
        Ok(Self { inertia, pi0, mode })
    }

    pub fn n(&self) -> usize {
        self.inertia.dim()
    }

    pub fn inertia(&self) -> &InertiaOperator {
        &self.inertia
    }

    pub fn pi0(&self) -> &InertiaOperator {
        &self.pi0
    }

    pub fn mode(&self) -> LplusRMode {
        self.mode
    }

    pub fn state(&self, g: DMatrix<f64>, omega: &SkewMatrix) -> PhasePoint {
        PhasePoint::new(vec![g], omega.coords())
    }

    /// Matrix of `Π^g` in bivector coordinates.
    pub fn pi_body(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        conjugated_matrix(self.pi0.matrix(), &adjoint_matrix(g))
    }

    /// Matrix of `𝓑 = I + Π^g`.
    pub fn total(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        self.inertia.matrix() + self.pi_body(g)
    }

    /// `ω̇` for a given body-frame `Π`, the whole-space form used by measure checks.
    pub fn accel_with_pi(&self, pi: &DMatrix<f64>, omega: &SkewMatrix) -> Result<DVector<f64>> {
        let b = self.inertia.matrix() + pi;
        let factor = spd_factor(&b)
            .ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: crate::operators::min_eigenvalue(&b) })?;
        let iw = self.inertia.apply(omega)?;
        let mut rhs = iw.bracket(omega).coords();
        if self.mode == LplusRMode::Geodesic {
            let piw = SkewMatrix::from_coord_vector(self.n(), &(pi * omega.coords()))?;
            rhs += omega.bracket(&piw).coords();
        }
        Ok(factor.solve(&rhs))
    }
}

impl System for LplusRSystem {
    fn kind(&self) -> SystemKind {
        match self.mode {
            LplusRMode::Nonholonomic => SystemKind::Lplusr,
            LplusRMode::Geodesic => SystemKind::GeodesicLpr,
        }
    }

    fn layout(&self) -> StateLayout {
        StateLayout { n: self.n(), groups: vec!["g".into()], flat: skew_names("omega", self.n()) }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        check_flat(x, bivector_dim(n))?;
        let g = the_group(x, n)?;
        let omega = skew_at(n, &x.flat, 0);
        let accel = self.accel_with_pi(&self.pi_body(g), &omega)?;
        Ok(PhaseVelocity { body: vec![omega], flat: accel })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let g = the_group(x, self.n())?;
        let w = &x.flat;
        Ok(0.5 * (self.total(g) * w).dot(w))
    }

    fn extra_quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        match (q, self.mode) {
            (Quantity::MomentumNorm, LplusRMode::Nonholonomic) => {
                let g = the_group(x, self.n())?;
                let bw = self.total(g) * &x.flat;
                Ok(DVector::from_element(1, bw.dot(&bw)))
            }
            _ => Err(crate::phase::undefined(q, self.kind())),
        }
    }
}
