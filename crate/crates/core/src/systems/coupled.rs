//! Coupled LR systems on `G × G₁` with Lagrangian `½⟨Iω, ω⟩ + ½D⟨W, W⟩` and
//! constraints `⟨Ω, 𝔥₀⟩ = 0`, `⟨Ω + ρ_i W, 𝔥_i⟩ = 0`.

use nalgebra::{DMatrix, DVector};

use super::multipliers::{body_covectors, pure_rows, solve_multipliers, ConstraintRow, PeripheralBlock};
use super::{check_flat, require, skew_at, the_group};
use crate::error::{check_dim, Error, Result};
use crate::liecore::{adjoint_matrix, bivector_dim, SkewMatrix, SubspaceBasis};
use crate::operators::{conjugated_matrix, spd_factor, InertiaOperator};
use crate::phase::{skew_names, NoetherLaw, PhasePoint, PhaseVelocity, Quantity, StateLayout, System, SystemKind};

/// Orthogonality tolerance between the coupling subspaces.
const OVERLAP_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct CoupledParams {
    pub inertia: InertiaOperator,
    pub h0: SubspaceBasis,
    pub hs: Vec<SubspaceBasis>,
    pub d: f64,
    pub rhos: Vec<f64>,
}

impl CoupledParams {
    pub fn validate(&self) -> Result<()> {
        let n = self.inertia.dim();
        self.inertia.factor()?;
        check_dim(n, self.h0.ambient_dim())?;
        check_dim(self.hs.len(), self.rhos.len())?;
        require(self.d > 0.0, format!("D must be positive, got {}", self.d))?;
        for (i, (h, rho)) in self.hs.iter().zip(&self.rhos).enumerate() {
            check_dim(n, h.ambient_dim())?;
            require(*rho != 0.0 && rho.is_finite(), format!("rho[{i}] must be nonzero"))?;
            for (j, other) in self.hs.iter().enumerate().skip(i + 1) {
                let overlap = h.max_overlap(other);
                require(overlap < OVERLAP_TOL, format!("h[{i}] and h[{j}] are not orthogonal ({overlap:e})"))?;
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.inertia.dim()
    }

    /// `Π⁰ = Σ D/ρ_i² pr_{𝔥_i}` in bivector coordinates.
    pub fn pi0(&self) -> DMatrix<f64> {
        let nb = bivector_dim(self.n());
        let mut pi = DMatrix::zeros(nb, nb);
        for (h, rho) in self.hs.iter().zip(&self.rhos) {
            let c = h.coordinate_matrix();
            pi += (&c * c.transpose()) * (self.d / (rho * rho));
        }
        pi
    }

    /// `𝔨 = (𝔥_1 + … + 𝔥_q)^⊥`.
    pub fn kernel(&self) -> Result<SubspaceBasis> {
        let parts: Vec<&SubspaceBasis> = self.hs.iter().collect();
        Ok(SubspaceBasis::sum(self.n(), &parts)?.complement())
    }

    /// `𝔨₀ = (𝔥_0 + 𝔥_1 + … + 𝔥_q)^⊥`.
    pub fn kernel0(&self) -> Result<SubspaceBasis> {
        let mut parts: Vec<&SubspaceBasis> = vec![&self.h0];
        parts.extend(self.hs.iter());
        Ok(SubspaceBasis::sum(self.n(), &parts)?.complement())
    }

    fn spatial_momentum(&self, g: &DMatrix<f64>, w: &DVector<f64>, k0: &SubspaceBasis) -> DVector<f64> {
        let space = adjoint_matrix(g) * self.inertia.apply_coords(w);
        k0.coordinate_matrix().transpose() * space
    }
}

/// Full system in `(g, ω, W)`; the second body's attitude is not integrated.
#[derive(Clone, Debug)]
pub struct CoupledSystem {
    params: CoupledParams,
    kernel: SubspaceBasis,
    kernel0: SubspaceBasis,
}

impl CoupledSystem {
    pub fn new(params: CoupledParams) -> Result<Self> {
        params.validate()?;
        let kernel = params.kernel()?;
        let kernel0 = params.kernel0()?;
        Ok(Self { params, kernel, kernel0 })
    }

    pub fn params(&self) -> &CoupledParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn state(&self, g: DMatrix<f64>, omega: &SkewMatrix, w: &SkewMatrix) -> PhasePoint {
        let nb = bivector_dim(self.n());
        let mut flat = DVector::zeros(2 * nb);
        flat.rows_mut(0, nb).copy_from(&omega.coords());
        flat.rows_mut(nb, nb).copy_from(&w.coords());
        PhasePoint::new(vec![g], flat)
    }

    /// Rebuilds the admissible `W` with the given `pr_𝔨 W`.
    pub fn consistent_w(&self, g: &DMatrix<f64>, omega: &SkewMatrix, kernel_part: &SkewMatrix) -> SkewMatrix {
        let big_omega =
            SkewMatrix::from_coord_vector(self.n(), &(adjoint_matrix(g) * omega.coords())).expect("bivector length");
        let mut w = self.kernel.project(kernel_part);
        for (h, rho) in self.params.hs.iter().zip(&self.params.rhos) {
            w += &(h.project(&big_omega) * (-1.0 / rho));
        }
        w
    }

    pub fn kernel(&self) -> &SubspaceBasis {
        &self.kernel
    }
}

impl System for CoupledSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::Coupled
    }

    fn layout(&self) -> StateLayout {
        let mut flat = skew_names("omega", self.n());
        flat.extend(skew_names("W", self.n()));
        StateLayout { n: self.n(), groups: vec!["g".into()], flat }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        let nb = bivector_dim(n);
        check_flat(x, 2 * nb)?;
        let g = the_group(x, n)?;
        let omega = skew_at(n, &x.flat, 0);
        let p = &self.params;
        let force = p.inertia.apply(&omega)?.bracket(&omega).coords();
        let mut rows = pure_rows(&body_covectors(g, &p.h0));
        for (h, rho) in p.hs.iter().zip(&p.rhos) {
            let alphas = body_covectors(g, h);
            for (r, a) in h.elements().iter().enumerate() {
                rows.push(ConstraintRow {
                    alpha: alphas.column(r).into_owned(),
                    peripheral: Some((0, a.coords() * *rho)),
                });
            }
        }
        let blocks = [PeripheralBlock { mass: p.d, dim: nb }];
        let sol = solve_multipliers(p.inertia.factor()?, &force, &rows, &blocks, None)?;
        let mut flat = DVector::zeros(2 * nb);
        flat.rows_mut(0, nb).copy_from(&sol.body_accel);
        flat.rows_mut(nb, nb).copy_from(&sol.peripheral_accel[0]);
        Ok(PhaseVelocity { body: vec![omega], flat })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let nb = bivector_dim(self.n());
        let w = x.flat.rows(0, nb).into_owned();
        let big_w = x.flat.rows(nb, nb);
        Ok(0.5 * self.params.inertia.apply_coords(&w).dot(&w) + 0.5 * self.params.d * big_w.dot(&big_w))
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        let n = self.n();
        let nb = bivector_dim(n);
        let g = the_group(x, n)?;
        let big_omega = adjoint_matrix(g) * x.flat.rows(0, nb);
        let big_w = x.flat.rows(nb, nb).into_owned();
        let mut out = Vec::new();
        for (r, a) in self.params.h0.elements().iter().enumerate() {
            out.push((format!("c-0[{r}]"), a.coords().dot(&big_omega)));
        }
        for (i, (h, rho)) in self.params.hs.iter().zip(&self.params.rhos).enumerate() {
            let v = &big_omega + &big_w * *rho;
            for (r, a) in h.elements().iter().enumerate() {
                out.push((format!("c-constr[{i}][{r}]"), a.coords().dot(&v)));
            }
        }
        Ok(out)
    }

    fn extra_quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        let nb = bivector_dim(self.n());
        match q {
            Quantity::Noether(NoetherLaw::PeripheralKernel) => {
                Ok(self.kernel.coordinate_matrix().transpose() * x.flat.rows(nb, nb))
            }
            Quantity::Noether(NoetherLaw::SpatialMomentum) => {
                let g = the_group(x, self.n())?;
                Ok(self.params.spatial_momentum(g, &x.flat.rows(0, nb).into_owned(), &self.kernel0))
            }
            _ => Err(crate::phase::undefined(q, self.kind())),
        }
    }
}

/// Reduced system in `(g, ω)`: `d/dt(𝓑ω) = [𝓑ω, ω] + λ₀`, `λ₀ ∈ 𝔥₀^g`.
#[derive(Clone, Debug)]
pub struct CoupledReducedSystem {
    params: CoupledParams,
    pi0: DMatrix<f64>,
    kernel0: SubspaceBasis,
}

impl CoupledReducedSystem {
    pub fn new(params: CoupledParams) -> Result<Self> {
        params.validate()?;
        let pi0 = params.pi0();
        let kernel0 = params.kernel0()?;
        Ok(Self { params, pi0, kernel0 })
    }

    pub fn params(&self) -> &CoupledParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn state(&self, g: DMatrix<f64>, omega: &SkewMatrix) -> PhasePoint {
        PhasePoint::new(vec![g], omega.coords())
    }

    /// `𝓑 = I + Σ D/ρ_i² pr_{𝔥_i^g}` as an operator.
    pub fn total(&self, g: &DMatrix<f64>) -> Result<InertiaOperator> {
        let m = self.params.inertia.matrix() + conjugated_matrix(&self.pi0, &adjoint_matrix(g));
        InertiaOperator::dense(self.n(), m)
    }

    /// `λ₀` from the closed form `-(𝓑⁻¹|_{𝔥₀^g})⁻¹ pr 𝓑⁻¹[Iω, ω]`; a test oracle.
    pub fn lambda0_closed_form(&self, g: &DMatrix<f64>, omega: &SkewMatrix) -> Result<SkewMatrix> {
        let b = self.total(g)?;
        let h0g = self.params.h0.conjugate_by_inverse(&crate::liecore::Rotation::from_matrix_unchecked(g.clone()));
        let f = self.params.inertia.apply(omega)?.bracket(omega);
        let y = h0g.project(&b.solve(&f)?);
        if h0g.is_empty() {
            return Ok(SkewMatrix::zeros(self.n()));
        }
        Ok(-b.restricted_operator_inverse(&h0g, &y)?)
    }
}

impl System for CoupledReducedSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::CoupledReduced
    }

    fn layout(&self) -> StateLayout {
        StateLayout { n: self.n(), groups: vec!["g".into()], flat: skew_names("omega", self.n()) }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        check_flat(x, bivector_dim(n))?;
        let g = the_group(x, n)?;
        let omega = skew_at(n, &x.flat, 0);
        let b = self.params.inertia.matrix() + conjugated_matrix(&self.pi0, &adjoint_matrix(g));
        let factor = spd_factor(&b)
            .ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: crate::operators::min_eigenvalue(&b) })?;
        let force = self.params.inertia.apply(&omega)?.bracket(&omega).coords();
        let rows = pure_rows(&body_covectors(g, &self.params.h0));
        let sol = solve_multipliers(&factor, &force, &rows, &[], None)?;
        Ok(PhaseVelocity { body: vec![omega], flat: sol.body_accel })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let g = the_group(x, self.n())?;
        let b = self.params.inertia.matrix() + conjugated_matrix(&self.pi0, &adjoint_matrix(g));
        Ok(0.5 * (b * &x.flat).dot(&x.flat))
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        let g = the_group(x, self.n())?;
        let big_omega = adjoint_matrix(g) * &x.flat;
        Ok(self
            .params
            .h0
            .elements()
            .iter()
            .enumerate()
            .map(|(r, a)| (format!("c-0[{r}]"), a.coords().dot(&big_omega)))
            .collect())
    }

    fn extra_quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        match q {
            Quantity::Noether(NoetherLaw::SpatialMomentum) => {
                let g = the_group(x, self.n())?;
                Ok(self.params.spatial_momentum(g, &x.flat, &self.kernel0))
            }
            Quantity::MomentumNorm if self.params.h0.is_empty() => {
                let g = the_group(x, self.n())?;
                let b = self.params.inertia.matrix() + conjugated_matrix(&self.pi0, &adjoint_matrix(g));
                let bw = b * &x.flat;
                Ok(DVector::from_element(1, bw.dot(&bw)))
            }
            _ => Err(crate::phase::undefined(q, self.kind())),
        }
    }
}
