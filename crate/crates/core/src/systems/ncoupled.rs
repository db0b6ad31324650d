//! N-coupled systems on `G × G_1 × … × G_N` with constraints `A_i Ω + B_i W_i = 0`.
//! Peripheral velocities `W_i ∈ ℝ^{d_i}` carry the kinetic energy `½ D_i |W_i|²`.

use nalgebra::{DMatrix, DVector};

use super::multipliers::{solve_multipliers, ConstraintRow, PeripheralBlock};
use super::{check_flat, require, skew_at, the_group};
use crate::error::{check_dim, Error, Result};
use crate::liecore::{ad_matrix, adjoint_matrix, bivector_dim, SkewMatrix, SubspaceBasis, UnitVector};
use crate::operators::{spd_factor, wedge_projector_matrix, InertiaOperator};
use crate::phase::{skew_names, vector_names, PhasePoint, PhaseVelocity, StateLayout, System, SystemKind};

/// One peripheral body: `[A]` is `p × N` in bivector coordinates, `[B]` is `p × d`.
#[derive(Clone, Debug)]
pub struct NCoupledBody {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub d: f64,
}

impl NCoupledBody {
    /// `[Ω, Γ] + ρ W = 0` on the abelian factor `so(n)`.
    pub fn commutator(gamma: &SkewMatrix, rho: f64, d: f64) -> Self {
        let nb = bivector_dim(gamma.dim());
        // X ↦ [X, Γ] = -ad_Γ X
        Self { a: -ad_matrix(gamma), b: DMatrix::identity(nb, nb) * rho, d }
    }

    /// `⟨Ω + ρ W, ℝⁿ∧Γ⟩ = 0` with `W ∈ so(n)`.
    pub fn spherical(gamma: &UnitVector, rho: f64, d: f64) -> Self {
        let rows = SubspaceBasis::wedge_with(gamma).coordinate_matrix().transpose();
        Self { b: &rows * rho, a: rows, d }
    }

    /// `⟨Ω + ρ W, ℝⁿ∧Γ⟩ = 0` and `⟨Ω - W, (ℝⁿ∧Γ)^⊥⟩ = 0`.
    pub fn rubber(gamma: &UnitVector, rho: f64, d: f64) -> Self {
        let nb = bivector_dim(gamma.dim());
        let ph = wedge_projector_matrix(gamma.as_vector());
        let pk = DMatrix::identity(nb, nb) - &ph;
        Self { a: DMatrix::identity(nb, nb), b: ph * rho - pk, d }
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn peripheral_dim(&self) -> usize {
        self.b.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct NCoupledSystem {
    inertia: InertiaOperator,
    bodies: Vec<NCoupledBody>,
}

impl NCoupledSystem {
    pub fn new(inertia: InertiaOperator, bodies: Vec<NCoupledBody>) -> Result<Self> {
        inertia.factor()?;
        let nb = bivector_dim(inertia.dim());
        for (i, body) in bodies.iter().enumerate() {
            check_dim(nb, body.a.ncols())?;
            check_dim(body.a.nrows(), body.b.nrows())?;
            require(body.d > 0.0, format!("D[{i}] must be positive"))?;
            let c = &body.b * body.b.transpose();
            if spd_factor(&c).is_none() {
                return Err(Error::Singular { what: "C_i = B_i B_iᵀ" });
            }
        }
        Ok(Self { inertia, bodies })
    }

    pub fn n(&self) -> usize {
        self.inertia.dim()
    }

    pub fn inertia(&self) -> &InertiaOperator {
        &self.inertia
    }

    pub fn bodies(&self) -> &[NCoupledBody] {
        &self.bodies
    }

    fn flat_len(&self) -> usize {
        bivector_dim(self.n()) + self.bodies.iter().map(|b| b.peripheral_dim()).sum::<usize>()
    }

    /// Space-frame `Π⁰ = Σ D_i A_iᵀ C_i⁻¹ A_i` of the reduced L+R system.
    pub fn reduced_pi0(&self) -> Result<InertiaOperator> {
        let nb = bivector_dim(self.n());
        let mut pi = DMatrix::zeros(nb, nb);
        for body in &self.bodies {
            let c = &body.b * body.b.transpose();
            let f = spd_factor(&c).ok_or(Error::Singular { what: "C_i = B_i B_iᵀ" })?;
            pi += body.a.transpose() * f.solve(&body.a) * body.d;
        }
        InertiaOperator::symmetric(self.n(), pi)
    }

    /// State with every `W_i` chosen as the least-norm solution of its constraint.
    pub fn consistent_state(&self, g: DMatrix<f64>, omega: &SkewMatrix) -> Result<PhasePoint> {
        let big_omega = adjoint_matrix(&g) * omega.coords();
        let mut flat = DVector::zeros(self.flat_len());
        let nb = bivector_dim(self.n());
        flat.rows_mut(0, nb).copy_from(&omega.coords());
        let mut off = nb;
        for body in &self.bodies {
            let c = &body.b * body.b.transpose();
            let f = spd_factor(&c).ok_or(Error::Singular { what: "C_i = B_i B_iᵀ" })?;
            let w = -(body.b.transpose() * f.solve(&(&body.a * &big_omega)));
            flat.rows_mut(off, w.len()).copy_from(&w);
            off += w.len();
        }
        Ok(PhasePoint::new(vec![g], flat))
    }
}

impl System for NCoupledSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::Ncoupled
    }

    fn layout(&self) -> StateLayout {
        let mut flat = skew_names("omega", self.n());
        for (i, body) in self.bodies.iter().enumerate() {
            flat.extend(vector_names(&format!("W{}", i + 1), body.peripheral_dim()));
        }
        StateLayout { n: self.n(), groups: vec!["g".into()], flat }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let n = self.n();
        let nb = bivector_dim(n);
        check_flat(x, self.flat_len())?;
        let g = the_group(x, n)?;
        let omega = skew_at(n, &x.flat, 0);
        let force = self.inertia.apply(&omega)?.bracket(&omega).coords();
        let r = adjoint_matrix(g);
        let mut rows = Vec::new();
        let mut blocks = Vec::new();
        for (i, body) in self.bodies.iter().enumerate() {
            // ⟨a, Ω⟩ = ⟨Ad_{g⁻¹} a, ω⟩: body covector Rᵀ a
            let alphas = r.transpose() * body.a.transpose();
            for k in 0..body.rows() {
                rows.push(ConstraintRow {
                    alpha: alphas.column(k).into_owned(),
                    peripheral: Some((i, body.b.row(k).transpose())),
                });
            }
            blocks.push(PeripheralBlock { mass: body.d, dim: body.peripheral_dim() });
        }
        let sol = solve_multipliers(self.inertia.factor()?, &force, &rows, &blocks, None)?;
        let mut flat = DVector::zeros(self.flat_len());
        flat.rows_mut(0, nb).copy_from(&sol.body_accel);
        let mut off = nb;
        for w in &sol.peripheral_accel {
            flat.rows_mut(off, w.len()).copy_from(w);
            off += w.len();
        }
        Ok(PhaseVelocity { body: vec![omega], flat })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let nb = bivector_dim(self.n());
        let w = x.flat.rows(0, nb).into_owned();
        let mut e = 0.5 * self.inertia.apply_coords(&w).dot(&w);
        let mut off = nb;
        for body in &self.bodies {
            let wi = x.flat.rows(off, body.peripheral_dim());
            e += 0.5 * body.d * wi.dot(&wi);
            off += body.peripheral_dim();
        }
        Ok(e)
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        let n = self.n();
        let nb = bivector_dim(n);
        let g = the_group(x, n)?;
        let big_omega = adjoint_matrix(g) * x.flat.rows(0, nb);
        let mut out = Vec::new();
        let mut off = nb;
        for (i, body) in self.bodies.iter().enumerate() {
            let wi = x.flat.rows(off, body.peripheral_dim());
            let res = &body.a * &big_omega + &body.b * wi;
            for (k, v) in res.iter().enumerate() {
                out.push((format!("c-N-constr[{i}][{k}]"), *v));
            }
            off += body.peripheral_dim();
        }
        Ok(out)
    }
}
