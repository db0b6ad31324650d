//! Phase points, velocities and the [`System`] trait shared by all vector fields.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liecore::{bivector_pairs, SkewMatrix};

/// A point of `SO(n)^k × ℝ^m`. Group factors are stored as raw matrices because
/// integrator stages are only approximately orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub groups: Vec<DMatrix<f64>>,
    pub flat: DVector<f64>,
}

/// Left-trivialized velocity: `ġ_k = g_k · body[k]`, plus the flat part.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVelocity {
    pub body: Vec<SkewMatrix>,
    pub flat: DVector<f64>,
}

impl PhasePoint {
    pub fn new(groups: Vec<DMatrix<f64>>, flat: DVector<f64>) -> Self {
        Self { groups, flat }
    }

    pub fn flat_only(flat: DVector<f64>) -> Self {
        Self { groups: Vec::new(), flat }
    }

    /// All entries, groups first (row-major), then the flat part.
    pub fn to_row(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in &self.groups {
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    out.push(g[(i, j)]);
                }
            }
        }
        out.extend(self.flat.iter());
        out
    }

    /// Largest entrywise difference to another point of the same layout.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let mut d: f64 = 0.0;
        for (a, b) in self.groups.iter().zip(&other.groups) {
            d = d.max((a - b).amax());
        }
        d.max((&self.flat - &other.flat).amax())
    }
}

/// Names of the state columns.
#[derive(Clone, Debug, PartialEq)]
pub struct StateLayout {
    pub n: usize,
    /// One prefix per group factor, e.g. `g`.
    pub groups: Vec<String>,
    pub flat: Vec<String>,
}

impl StateLayout {
    pub fn column_names(&self) -> Vec<String> {
        let mut cols = Vec::new();
        for prefix in &self.groups {
            for i in 1..=self.n {
                for j in 1..=self.n {
                    cols.push(format!("{prefix}_{i}{j}"));
                }
            }
        }
        cols.extend(self.flat.iter().cloned());
        cols
    }
}

/// `prefix_ij` for the bivector coordinates, 1-based.
pub fn skew_names(prefix: &str, n: usize) -> Vec<String> {
    bivector_pairs(n).map(|(i, j)| format!("{prefix}_{}{}", i + 1, j + 1)).collect()
}

/// `prefix_i`, 1-based.
pub fn vector_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

/// Which linear conservation law to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoetherLaw {
    /// `pr_𝔨 W`, `𝔨 = (𝔥_1 + … + 𝔥_q)^⊥`.
    PeripheralKernel,
    /// `pr_{𝔨_0} Ad_g(Iω)`, `𝔨_0 = (𝔥_0 + … + 𝔥_q)^⊥`.
    SpatialMomentum,
}

/// A scalar or vector function of the state whose drift can be reported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Energy,
    /// `⟨𝓑ω, 𝓑ω⟩`.
    MomentumNorm,
    /// `tr(L(μ)^k)` for the Lax matrix `L(μ) = 𝓑ω + Σ μ_i X_i`.
    TraceIntegral {
        k: usize,
        mu: Vec<f64>,
    },
    /// All polynomial coefficients of `tr(L(μ)^k)` in `μ`.
    TraceCoefficients {
        k: usize,
    },
    Noether(NoetherLaw),
    /// One named constraint residual, by position.
    ConstraintResidual(usize),
    /// The Lagrangian `L*` of the geodesic flow on the sphere.
    LStarEnergy,
    /// `⟨γ, γ⟩` for an adjoint-orbit variable `γ`.
    OrbitNorm,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Energy => write!(f, "energy"),
            Quantity::MomentumNorm => write!(f, "momentum-norm"),
            Quantity::TraceIntegral { k, mu } => {
                let mu: Vec<String> = mu.iter().map(|m| format!("{m}")).collect();
                write!(f, "trace-integral({k}, [{}])", mu.join(", "))
            }
            Quantity::TraceCoefficients { k } => write!(f, "trace-coefficients({k})"),
            Quantity::Noether(NoetherLaw::PeripheralKernel) => write!(f, "noether(k)"),
            Quantity::Noether(NoetherLaw::SpatialMomentum) => write!(f, "noether(k0)"),
            Quantity::ConstraintResidual(i) => write!(f, "constraint-residual({i})"),
            Quantity::LStarEnergy => write!(f, "lstar-energy"),
            Quantity::OrbitNorm => write!(f, "orbit-norm"),
        }
    }
}

/// System tags, also the scenario names used by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Lr,
    Lplusr,
    GeodesicLpr,
    Coupled,
    CoupledReduced,
    Ncoupled,
    Support,
    RubberSupport,
    RubberChaplygin,
    Cotangent,
    LstarGeodesic,
    Gsr,
    ClassicalRubber,
    ClassicalChaplygin,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Lr => "lr",
            SystemKind::Lplusr => "lplusr",
            SystemKind::GeodesicLpr => "geodesic-lpr",
            SystemKind::Coupled => "coupled",
            SystemKind::CoupledReduced => "coupled-reduced",
            SystemKind::Ncoupled => "ncoupled",
            SystemKind::Support => "support",
            SystemKind::RubberSupport => "rubber-support",
            SystemKind::RubberChaplygin => "rubber-chaplygin",
            SystemKind::Cotangent => "cotangent",
            SystemKind::LstarGeodesic => "lstar-geodesic",
            SystemKind::Gsr => "gsr",
            SystemKind::ClassicalRubber => "classical-rubber",
            SystemKind::ClassicalChaplygin => "classical-chaplygin",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An autonomous vector field on a [`PhasePoint`] space together with its observables.
pub trait System: Send + Sync {
    fn kind(&self) -> SystemKind;

    fn layout(&self) -> StateLayout;

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity>;

    /// Pull auxiliary variables back onto their manifolds after a step
    /// (unit vectors, tangency). Group factors are handled by the integrator.
    fn renormalize(&self, _x: &mut PhasePoint) {}

    fn energy(&self, x: &PhasePoint) -> Result<f64>;

    /// Named constraint residuals; each should vanish on admissible states.
    fn constraint_residuals(&self, _x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        Ok(Vec::new())
    }

    /// System-specific quantities beyond energy and constraint residuals.
    fn extra_quantity(&self, q: &Quantity, _x: &PhasePoint) -> Result<DVector<f64>> {
        Err(undefined(q, self.kind()))
    }

    fn quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        match q {
            Quantity::Energy => Ok(DVector::from_element(1, self.energy(x)?)),
            Quantity::ConstraintResidual(i) => {
                let all = self.constraint_residuals(x)?;
                all.get(*i).map(|(_, r)| DVector::from_element(1, *r)).ok_or_else(|| undefined(q, self.kind()))
            }
            other => self.extra_quantity(other, x),
        }
    }

    /// Rejects states off the constraint set by more than `tol`.
    fn validate(&self, x: &PhasePoint, tol: f64) -> Result<()> {
        for (name, residual) in self.constraint_residuals(x)? {
            if !(residual.abs() <= tol) {
                return Err(Error::ConstraintViolated { name, residual });
            }
        }
        Ok(())
    }
}

pub(crate) fn undefined(q: &Quantity, kind: SystemKind) -> Error {
    Error::UndefinedQuantity(format!("{q} is not defined for {kind}"))
}

impl<S: System + ?Sized> System for Box<S> {
    fn kind(&self) -> SystemKind {
        (**self).kind()
    }
    fn layout(&self) -> StateLayout {
        (**self).layout()
    }
    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        (**self).eval(x)
    }
    fn renormalize(&self, x: &mut PhasePoint) {
        (**self).renormalize(x)
    }
    fn energy(&self, x: &PhasePoint) -> Result<f64> {
        (**self).energy(x)
    }
    fn constraint_residuals(&self, x: &PhasePoint) -> Result<Vec<(String, f64)>> {
        (**self).constraint_residuals(x)
    }
    fn extra_quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        (**self).extra_quantity(q, x)
    }
    fn quantity(&self, q: &Quantity, x: &PhasePoint) -> Result<DVector<f64>> {
        (**self).quantity(q, x)
    }
    fn validate(&self, x: &PhasePoint, tol: f64) -> Result<()> {
        (**self).validate(x, tol)
    }
}
