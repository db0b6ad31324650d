//! Scenario files: TOML with kebab-case keys.

use lrmech::integrators::Method;
use lrmech::phase::{Quantity, SystemKind};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Scenario {
    pub system: SystemKind,
    pub n: usize,
    #[serde(default)]
    pub inertia: InertiaSpec,
    #[serde(default)]
    pub params: Params,
    /// Constraint subspaces of `lr`; for `lplusr` they define the ε sweep.
    #[serde(default)]
    pub constraints: Vec<SubspaceSpec>,
    /// Space-frame `Π⁰` of `lplusr` / `geodesic-lpr`.
    pub pi0: Option<InertiaSpec>,
    pub coupled: Option<CoupledSpec>,
    #[serde(default)]
    pub contacts: Vec<ContactSpec>,
    #[serde(default)]
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InertiaSpec {
    #[default]
    Identity,
    Scalar {
        value: f64,
    },
    /// Entries on the `E_ij` basis, `i < j` lexicographic.
    Diagonal {
        values: Vec<f64>,
    },
    /// `I(E_ij) = (J_i + J_j) E_ij`.
    RigidBody {
        moments: Vec<f64>,
    },
    /// `I(E_ij) = (A_iA_j - c) E_ij`; `c` defaults to `mρ²`.
    Special {
        a: Vec<f64>,
        c: Option<f64>,
    },
    /// Symmetric matrix in bivector coordinates, given by rows.
    Dense {
        matrix: Vec<Vec<f64>>,
    },
    /// 3×3 inertia tensor under the hat map (n = 3 only).
    Vector3 {
        matrix: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    pub m: Option<f64>,
    pub rho: Option<f64>,
    /// Diagonal `A` of the `L*` metric.
    pub a: Option<Vec<f64>>,
    /// Use the literal `L*` Lagrangian without the conformal factor.
    #[serde(default)]
    pub unscaled: bool,
}

/// A subspace of so(n): span of `x∧y` over `pairs`, bivector coordinates in
/// `bivectors`, or `ℝⁿ∧Γ` for `wedge-with = Γ`.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SubspaceSpec {
    #[serde(default)]
    pub pairs: Vec<[Vec<f64>; 2]>,
    #[serde(default)]
    pub bivectors: Vec<Vec<f64>>,
    pub wedge_with: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CoupledSpec {
    #[serde(default)]
    pub h0: SubspaceSpec,
    pub hs: Vec<SubspaceSpec>,
    pub d: f64,
    pub rhos: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ContactSpec {
    pub gamma: Vec<f64>,
    pub d: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BodyKind {
    Commutator,
    Spherical,
    Rubber,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BodySpec {
    pub kind: BodyKind,
    /// Unit vector for spherical and rubber bodies.
    pub gamma: Option<Vec<f64>>,
    /// Bivector coordinates of `Γ` for commutator bodies.
    pub bivector: Option<Vec<f64>>,
    pub rho: f64,
    pub d: f64,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct InitialSpec {
    /// Rows of `g ∈ SO(n)`; identity when absent.
    pub g: Option<Vec<Vec<f64>>>,
    /// Bivector coordinates of `ω` (3-vector for the classical systems).
    pub omega: Option<Vec<f64>>,
    /// Bivector coordinates of `W` (coupled) or stacked peripheral velocities (ncoupled).
    pub w: Option<Vec<f64>>,
    /// Unit vector (cotangent, lstar-geodesic, classical) or bivector coordinates (gsr).
    pub gamma: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    /// `γ̇` in place of `p` (cotangent) or `γ′` (lstar-geodesic).
    pub velocity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct IntegratorSpec {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_h")]
    pub h: f64,
    pub steps: Option<usize>,
    pub t_end: Option<f64>,
    #[serde(default = "default_renormalize")]
    pub renormalize_every: usize,
}

fn default_h() -> f64 {
    1e-3
}

fn default_renormalize() -> usize {
    1
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { method: Method::default(), h: default_h(), steps: None, t_end: None, renormalize_every: 1 }
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DiagnosticsSpec {
    /// Extra quantities for the conservation report.
    #[serde(default)]
    pub quantities: Vec<Quantity>,
    /// ε values for the L+R → LR limit table.
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Restrict `verify` to these check names; an empty list runs nothing.
    pub checks: Option<Vec<String>>,
}

/// Parse error with a 1-based line and column.
#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub fn parse(source: &str) -> Result<Scenario, ParseError> {
    toml::from_str(source).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => line_column(source, span.start),
            None => (1, 1),
        };
        ParseError { line, column, message: e.message().trim().to_string() }
    })
}

fn line_column(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
