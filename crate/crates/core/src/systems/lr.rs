//! LR systems: left-invariant metric `I`, right-invariant constraints `⟨Ω, 𝔥⟩ = 0`.
//! With an empty constraint space this is the free Euler top on SO(n).

use nalgebra::{DMatrix, DVector};

use super::multipliers::{body_covectors, pure_rows, solve_multipliers};
use super::{check_flat, skew_at, the_group};
use crate::error::{check_dim, Result};
use crate::liecore::{adjoint_matrix, bivector_dim, SkewMatrix, SubspaceBasis};
use crate::operators::InertiaOperator;
use crate::phase::{skew_names, NoetherLaw, PhasePoint, PhaseVelocity, Quantity, StateLayout, System, SystemKind};

#[derive(Clone, Debug)]
pub struct LrSystem {
    inertia: InertiaOperator,
    /// Space-frame constraint subspace `𝔥 = span{a_i}`.
    constraints: SubspaceBasis,
    complement: SubspaceBasis,
}

impl LrSystem {
    pub fn new(inertia: InertiaOperator, constraints: SubspaceBasis) -> Result<Self> {
        check_dim(inertia.dim(), constraints.ambient_dim())?;
        inertia.factor()?;
        let complement = constraints.complement();
        Ok(Self { inertia, constraints, complement })
    }

    pub fn free_top(inertia: InertiaOperator) -> Self {
        let n = inertia.dim();
        Self::new(inertia, SubspaceBasis::empty(n)).expect("free top is always valid")
    }

    pub fn inertia(&self) -> &InertiaOperator {
        &self.inertia
    }

    pub fn constraints(&self) -> &SubspaceBasis {
        &self.constraints
    }

    pub fn n(&self) -> usize {
        self.inertia.dim()
    }

    pub fn state(&self, g: DMatrix<f64>, omega: &SkewMatrix) -> PhasePoint {
        PhasePoint::new(vec![g], omega.coords())
    }

    pub fn omega(&self, x: &PhasePoint) -> SkewMatrix {
        skew_at(self.n(), &x.flat, 0)
    }

    /// Moving covectors `α_i = Ad_{g⁻¹} a_i`, as columns.
    pub fn alphas(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        body_covectors(g, &self.constraints)
    }

    /// `ω̇` together with the multipliers `λ`.
    pub fn accel_and_multipliers(&self, g: &DMatrix<f64>, omega: &SkewMatrix) -> Result<(DVector<f64>, DVector<f64>)> {
        let m = self.inertia.apply(omega)?;
        let force = m.bracket(omega).coords();
        let rows = pure_rows(&self.alphas(g));
        let sol = solve_multipliers(self.inertia.factor()?, &force, &rows, &[], None)?;
        Ok((sol.body_accel, sol.lambda))
    }
}

impl System for LrSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::Lr
    }

    fn layout(&self) -> StateLayout {
        StateLayout { n: self.n(), groups: vec!["g".into()], flat: skew_names("omega", self.n()) }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        check_flat(x, bivector_dim(n))?;
        let g = the_group(x, n)?;
        let omega = self.omega(x);
        let (accel, _) = self.accel_and_multipliers(g, &omega)?;
        Ok(PhaseVelocity { body: vec![omega], flat: accel })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let w = x.flat.rows(0, bivector_dim(self.n())).into_owned();
        Ok(0.5 * self.inertia.apply_coords(&w).dot(&w))
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        let g = the_group(x, self.n())?;
        let w = x.flat.rows(0, bivector_dim(self.n())).into_owned();
        let alphas = self.alphas(g);
        Ok((0..alphas.ncols()).map(|i| (format!("Rconstr[{i}]"), alphas.column(i).dot(&w))).collect())
    }

    fn extra_quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        let w = x.flat.rows(0, bivector_dim(self.n())).into_owned();
        let m = self.inertia.apply_coords(&w);
        match q {
            Quantity::MomentumNorm if self.constraints.is_empty() => Ok(DVector::from_element(1, m.dot(&m))),
            Quantity::Noether(NoetherLaw::SpatialMomentum) => {
                let g = the_group(x, self.n())?;
                let space = adjoint_matrix(g) * m;
                Ok(self.complement.coordinate_matrix().transpose() * space)
            }
            _ => Err(crate::phase::undefined(q, self.kind())),
        }
    }
}
