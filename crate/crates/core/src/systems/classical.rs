//! Vector-form equations on `ℝ³` used as independent oracles for the `n = 3` cases.
//! State `(ω, γ) ∈ ℝ⁶`, hat map `iso3(v)_ij = -ε_ijl v_l` so that `iso3(v) x = v × x`.

use nalgebra::{DVector, Matrix3, Vector3};

use super::{check_flat, require};
use crate::error::{check_dim, Error, Result};
use crate::liecore::SkewMatrix;
use crate::operators::InertiaOperator;
use crate::phase::{vector_names, PhasePoint, PhaseVelocity, StateLayout, System, SystemKind};

pub fn iso3(v: &Vector3<f64>) -> SkewMatrix {
    SkewMatrix::from_coords(3, &[-v[2], v[1], -v[0]]).expect("three coordinates")
}

pub fn iso3_inverse(x: &SkewMatrix) -> Result<Vector3<f64>> {
    if x.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: x.dim() });
    }
    let m = x.as_matrix();
    Ok(Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

fn split(x: &PhasePoint) -> Result<(Vector3<f64>, Vector3<f64>)> {
    check_flat(x, 6)?;
    let f = &x.flat;
    Ok((Vector3::new(f[0], f[1], f[2]), Vector3::new(f[3], f[4], f[5])))
}

fn pack(a: &Vector3<f64>, b: &Vector3<f64>) -> DVector<f64> {
    DVector::from_vec(vec![a[0], a[1], a[2], b[0], b[1], b[2]])
}

fn layout() -> StateLayout {
    let mut flat = vector_names("omega", 3);
    flat.extend(vector_names("gamma", 3));
    StateLayout { n: 3, groups: Vec::new(), flat }
}

fn vector_inertia(inertia: &InertiaOperator) -> Result<Matrix3<f64>> {
    check_dim(3, inertia.dim())?;
    inertia.to_vector_inertia()
}

/// Rubber ball: `k = Jω`, `J = I₃ + mρ²`, `k̇ = k × ω + λγ`, `γ̇ = γ × ω`, `(ω, γ) = 0`.
#[derive(Clone, Debug)]
pub struct ClassicalRubberSystem {
    j: Matrix3<f64>,
    j_inv: Matrix3<f64>,
}

impl ClassicalRubberSystem {
    pub fn new(inertia: &InertiaOperator, m: f64, rho: f64) -> Result<Self> {
        require(m > 0.0 && rho > 0.0, "mass and radius must be positive")?;
        let j = vector_inertia(inertia)? + Matrix3::identity() * (m * rho * rho);
        let j_inv = j.try_inverse().ok_or(Error::Singular { what: "vector inertia" })?;
        Ok(Self { j, j_inv })
    }

    pub fn state(&self, omega: &Vector3<f64>, gamma: &Vector3<f64>) -> PhasePoint {
        PhasePoint::flat_only(pack(omega, gamma))
    }
}

impl System for ClassicalRubberSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::ClassicalRubber
    }

    fn layout(&self) -> StateLayout {
        layout()
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let (w, g) = split(x)?;
        let kxw = (self.j * w).cross(&w);
        let jg = self.j_inv * g;
        let lambda = -g.dot(&(self.j_inv * kxw)) / g.dot(&jg);
        let wdot = self.j_inv * (kxw + g * lambda);
        Ok(PhaseVelocity { body: Vec::new(), flat: pack(&wdot, &g.cross(&w)) })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let (w, _) = split(x)?;
        Ok(0.5 * w.dot(&(self.j * w)))
    }

    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        let (w, g) = split(x)?;
        Ok(vec![("omega.gamma".into(), w.dot(&g))])
    }
}

/// Classical Chaplygin sphere: `k = I₃ω + mρ²(|γ|²ω - (ω,γ)γ)`, `k̇ = k × ω`, `γ̇ = γ × ω`.
#[derive(Clone, Debug)]
pub struct ClassicalChaplyginSystem {
    i3: Matrix3<f64>,
    mr2: f64,
}

impl ClassicalChaplyginSystem {
    pub fn new(inertia: &InertiaOperator, m: f64, rho: f64) -> Result<Self> {
        require(m > 0.0 && rho != 0.0, "mass must be positive and radius nonzero")?;
        Ok(Self { i3: vector_inertia(inertia)?, mr2: m * rho * rho })
    }

    pub fn state(&self, omega: &Vector3<f64>, gamma: &Vector3<f64>) -> PhasePoint {
        PhasePoint::flat_only(pack(omega, gamma))
    }

    fn mass_matrix(&self, g: &Vector3<f64>) -> Matrix3<f64> {
        self.i3 + (Matrix3::identity() * g.norm_squared() - g * g.transpose()) * self.mr2
    }
}

impl System for ClassicalChaplyginSystem {
    fn kind(&self) -> SystemKind {
        SystemKind::ClassicalChaplygin
    }

    fn layout(&self) -> StateLayout {
        layout()
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        let (w, g) = split(x)?;
        let m = self.mass_matrix(&g);
        let k = m * w;
        let gdot = g.cross(&w);
        let rhs = k.cross(&w) + gdot * (self.mr2 * w.dot(&g));
        let wdot = m.lu().solve(&rhs).ok_or(Error::Singular { what: "Chaplygin mass matrix" })?;
        Ok(PhaseVelocity { body: Vec::new(), flat: pack(&wdot, &gdot) })
    }

    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        let (w, g) = split(x)?;
        Ok(0.5 * w.dot(&(self.mass_matrix(&g) * w)))
    }
}
