//! Turns a parsed [`Scenario`] into a concrete system, initial state and integrator config.

use lrmech::integrators::{IntegratorConfig, Method};
use lrmech::liecore::{bivector_dim, bivector_pairs, wedge, Rotation, SkewMatrix, SubspaceBasis, UnitVector};
use lrmech::operators::InertiaOperator;
use lrmech::phase::{PhasePoint, System, SystemKind};
use lrmech::systems::{
    ClassicalChaplyginSystem, ClassicalRubberSystem, CotangentSystem, CoupledParams, CoupledReducedSystem,
    CoupledSystem, GsrSystem, LStarSystem, LplusRMode, LplusRSystem, LrSystem, NCoupledBody, NCoupledSystem,
    RubberChaplyginSystem, SupportSystem,
};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{invalid, CliError};
use crate::scenario::{BodyKind, InertiaSpec, Scenario, SubspaceSpec};

/// Tolerance on the initial constraint residuals.
pub const INITIAL_TOL: f64 = 1e-8;

pub enum Typed {
    Lr(LrSystem),
    LplusR(LplusRSystem),
    Coupled(CoupledSystem),
    CoupledReduced(CoupledReducedSystem),
    NCoupled(NCoupledSystem),
    Support(SupportSystem),
    RubberChaplygin(RubberChaplyginSystem),
    Cotangent(CotangentSystem),
    LStar(LStarSystem),
    Gsr(GsrSystem),
    ClassicalRubber(ClassicalRubberSystem),
    ClassicalChaplygin(ClassicalChaplyginSystem),
}

impl Typed {
    pub fn system(&self) -> &dyn System {
        match self {
            Typed::Lr(s) => s,
            Typed::LplusR(s) => s,
            Typed::Coupled(s) => s,
            Typed::CoupledReduced(s) => s,
            Typed::NCoupled(s) => s,
            Typed::Support(s) => s,
            Typed::RubberChaplygin(s) => s,
            Typed::Cotangent(s) => s,
            Typed::LStar(s) => s,
            Typed::Gsr(s) => s,
            Typed::ClassicalRubber(s) => s,
            Typed::ClassicalChaplygin(s) => s,
        }
    }
}

pub struct Built {
    pub scenario: Scenario,
    pub typed: Typed,
    pub x0: PhasePoint,
    pub cfg: IntegratorConfig,
    /// Constraint subspace of `[[constraints]]`, used by LR and the ε sweep.
    pub constraints: SubspaceBasis,
    /// `A` when the inertia is special with `c = mρ²`.
    pub special_a: Option<Vec<f64>>,
}

impl Built {
    pub fn system(&self) -> &dyn System {
        self.typed.system()
    }
}

/// Command-line overrides of the `[integrator]` table.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub h: Option<f64>,
    pub steps: Option<usize>,
    pub method: Option<Method>,
}

pub fn build(scenario: Scenario, overrides: Overrides) -> Result<Built, CliError> {
    let n = scenario.n;
    if n < 2 {
        return Err(invalid(format!("n must be at least 2, got {n}")));
    }
    let cfg = integrator_config(&scenario, overrides)?;
    let constraints = subspace_sum(n, &scenario.constraints, "constraints")?;
    let g = initial_g(&scenario)?;
    let omega_coords = || -> Result<SkewMatrix, CliError> {
        match &scenario.initial.omega {
            Some(c) => skew(n, c, "initial.omega"),
            None => Ok(SkewMatrix::zeros(n)),
        }
    };
    let mut special_a = None;
    let (typed, x0) = match scenario.system {
        SystemKind::Lr => {
            let sys = LrSystem::new(inertia(&scenario.inertia, n, &scenario)?, constraints.clone())?;
            let x0 = sys.state(g, &omega_coords()?);
            (Typed::Lr(sys), x0)
        }
        SystemKind::Lplusr | SystemKind::GeodesicLpr => {
            let mode =
                if scenario.system == SystemKind::Lplusr { LplusRMode::Nonholonomic } else { LplusRMode::Geodesic };
            let pi0 = scenario.pi0.as_ref().ok_or_else(|| invalid("`pi0` is required for this system"))?;
            let pi0 = symmetric_operator(pi0, n, &scenario)?;
            let sys = LplusRSystem::new(inertia(&scenario.inertia, n, &scenario)?, pi0, mode)?;
            let x0 = sys.state(g, &omega_coords()?);
            (Typed::LplusR(sys), x0)
        }
        SystemKind::Coupled | SystemKind::CoupledReduced => {
            let spec = scenario.coupled.as_ref().ok_or_else(|| invalid("`[coupled]` is required for this system"))?;
            let hs = spec
                .hs
                .iter()
                .enumerate()
                .map(|(i, h)| subspace(n, h, &format!("coupled.hs[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let params = CoupledParams {
                inertia: inertia(&scenario.inertia, n, &scenario)?,
                h0: subspace(n, &spec.h0, "coupled.h0")?,
                hs,
                d: spec.d,
                rhos: spec.rhos.clone(),
            };
            let omega = omega_coords()?;
            if scenario.system == SystemKind::Coupled {
                let sys = CoupledSystem::new(params)?;
                let w = match &scenario.initial.w {
                    Some(c) => skew(n, c, "initial.w")?,
                    None => sys.consistent_w(&g, &omega, &SkewMatrix::zeros(n)),
                };
                let x0 = sys.state(g, &omega, &w);
                (Typed::Coupled(sys), x0)
            } else {
                let sys = CoupledReducedSystem::new(params)?;
                let x0 = sys.state(g, &omega);
                (Typed::CoupledReduced(sys), x0)
            }
        }
        SystemKind::Ncoupled => {
            if scenario.bodies.is_empty() {
                return Err(invalid("ncoupled needs at least one `[[bodies]]` entry"));
            }
            let mut bodies = Vec::new();
            for (i, b) in scenario.bodies.iter().enumerate() {
                let what = format!("bodies[{i}]");
                bodies.push(match b.kind {
                    BodyKind::Commutator => {
                        let c = b.bivector.as_ref().ok_or_else(|| invalid(format!("{what}.bivector is required")))?;
                        NCoupledBody::commutator(&skew(n, c, &what)?, b.rho, b.d)
                    }
                    BodyKind::Spherical | BodyKind::Rubber => {
                        let v = b.gamma.as_ref().ok_or_else(|| invalid(format!("{what}.gamma is required")))?;
                        let gamma = unit_param(n, v, &what)?;
                        if b.kind == BodyKind::Spherical {
                            NCoupledBody::spherical(&gamma, b.rho, b.d)
                        } else {
                            NCoupledBody::rubber(&gamma, b.rho, b.d)
                        }
                    }
                });
            }
            let sys = NCoupledSystem::new(inertia(&scenario.inertia, n, &scenario)?, bodies)?;
            let omega = omega_coords()?;
            let x0 = match &scenario.initial.w {
                Some(w) => {
                    let template = sys.consistent_state(g.clone(), &omega)?;
                    let nb = bivector_dim(n);
                    let expected = template.flat.len() - nb;
                    if w.len() != expected {
                        return Err(invalid(format!("initial.w has {} entries, expected {expected}", w.len())));
                    }
                    let mut flat = template.flat.clone();
                    flat.rows_mut(nb, expected).copy_from_slice(w);
                    PhasePoint::new(vec![g], flat)
                }
                None => sys.consistent_state(g, &omega)?,
            };
            (Typed::NCoupled(sys), x0)
        }
        SystemKind::Support | SystemKind::RubberSupport => {
            if scenario.contacts.is_empty() {
                return Err(invalid("support systems need at least one `[[contacts]]` entry"));
            }
            let contacts = scenario
                .contacts
                .iter()
                .enumerate()
                .map(|(i, c)| unit_param(n, &c.gamma, &format!("contacts[{i}].gamma")))
                .collect::<Result<Vec<_>, _>>()?;
            let d = scenario.contacts.iter().map(|c| c.d).collect();
            let rho = scenario.contacts.iter().map(|c| c.rho).collect();
            let rubber = scenario.system == SystemKind::RubberSupport;
            let sys = SupportSystem::new(inertia(&scenario.inertia, n, &scenario)?, contacts, d, rho, rubber)?;
            let x0 = sys.state(g, &omega_coords()?);
            (Typed::Support(sys), x0)
        }
        SystemKind::RubberChaplygin => {
            let (m, rho) = mass_radius(&scenario)?;
            let sys = RubberChaplyginSystem::new(inertia(&scenario.inertia, n, &scenario)?, m, rho)?;
            let x0 = sys.state(g, &omega_coords()?);
            (Typed::RubberChaplygin(sys), x0)
        }
        SystemKind::Cotangent => {
            let (m, rho) = mass_radius(&scenario)?;
            if let InertiaSpec::Special { a, c } = &scenario.inertia {
                let c = c.unwrap_or(m * rho * rho);
                if (c - m * rho * rho).abs() <= 1e-12 * c.abs().max(1.0) {
                    special_a = Some(a.clone());
                }
            }
            let sys = CotangentSystem::new(inertia(&scenario.inertia, n, &scenario)?, m, rho)?;
            let init = &scenario.initial;
            let x0 = match &init.gamma {
                Some(gv) => {
                    let gamma = vector(n, gv, "initial.gamma")?;
                    let p = match (&init.p, &init.velocity) {
                        (Some(_), Some(_)) => {
                            return Err(invalid("give either initial.p or initial.velocity, not both"))
                        }
                        (Some(p), None) => vector(n, p, "initial.p")?,
                        (None, Some(v)) => sys.momentum_of_velocity(&gamma, &vector(n, v, "initial.velocity")?)?,
                        (None, None) => DVector::zeros(n),
                    };
                    sys.state(&gamma, &p)
                }
                None => sys.from_group(&g, &omega_coords()?)?,
            };
            (Typed::Cotangent(sys), x0)
        }
        SystemKind::LstarGeodesic => {
            let a = scenario.params.a.as_ref().ok_or_else(|| invalid("params.a is required for lstar-geodesic"))?;
            if a.len() != n {
                return Err(invalid(format!("params.a has {} entries, expected {n}", a.len())));
            }
            let sys = if scenario.params.unscaled { LStarSystem::unscaled(a)? } else { LStarSystem::new(a)? };
            let gv = scenario.initial.gamma.as_ref().ok_or_else(|| invalid("initial.gamma is required"))?;
            let gamma = vector(n, gv, "initial.gamma")?;
            let v = match &scenario.initial.velocity {
                Some(v) => vector(n, v, "initial.velocity")?,
                None => DVector::zeros(n),
            };
            let x0 = sys.state(&gamma, &v);
            (Typed::LStar(sys), x0)
        }
        SystemKind::Gsr => {
            let (m, rho) = mass_radius(&scenario)?;
            let sys = GsrSystem::new(inertia(&scenario.inertia, n, &scenario)?, m, rho)?;
            let gv = scenario.initial.gamma.as_ref().ok_or_else(|| invalid("initial.gamma is required"))?;
            let x0 = sys.state(&omega_coords()?, &skew(n, gv, "initial.gamma")?);
            (Typed::Gsr(sys), x0)
        }
        SystemKind::ClassicalRubber | SystemKind::ClassicalChaplygin => {
            if n != 3 {
                return Err(invalid(format!("{} is defined for n = 3 only", scenario.system)));
            }
            let (m, rho) = mass_radius(&scenario)?;
            let op = inertia(&scenario.inertia, n, &scenario)?;
            let omega = match &scenario.initial.omega {
                Some(w) => vector3(w, "initial.omega")?,
                None => Vector3::zeros(),
            };
            let gv = scenario.initial.gamma.as_ref().ok_or_else(|| invalid("initial.gamma is required"))?;
            let gamma = vector3(gv, "initial.gamma")?;
            if scenario.system == SystemKind::ClassicalRubber {
                let sys = ClassicalRubberSystem::new(&op, m, rho)?;
                let x0 = sys.state(&omega, &gamma);
                (Typed::ClassicalRubber(sys), x0)
            } else {
                let sys = ClassicalChaplyginSystem::new(&op, m, rho)?;
                let x0 = sys.state(&omega, &gamma);
                (Typed::ClassicalChaplygin(sys), x0)
            }
        }
    };
    typed.system().validate(&x0, INITIAL_TOL).map_err(|e| invalid(format!("initial state: {e}")))?;
    Ok(Built { scenario, typed, x0, cfg, constraints, special_a })
}

fn integrator_config(s: &Scenario, o: Overrides) -> Result<IntegratorConfig, CliError> {
    let spec = &s.integrator;
    let method = o.method.unwrap_or(spec.method);
    let h = o.h.unwrap_or(spec.h);
    let steps = match (o.steps, spec.steps, spec.t_end) {
        (Some(k), _, _) => k,
        (None, Some(_), Some(_)) => return Err(invalid("give either integrator.steps or integrator.t-end, not both")),
        (None, Some(k), None) => k,
        (None, None, Some(t)) => {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(format!("integrator.t-end must be non-negative, got {t}")));
            }
            IntegratorConfig::for_duration(method, h, t).steps
        }
        (None, None, None) => IntegratorConfig::default().steps,
    };
    let cfg = IntegratorConfig { method, h, steps, renormalize_every: spec.renormalize_every };
    cfg.validate()?;
    Ok(cfg)
}

fn mass_radius(s: &Scenario) -> Result<(f64, f64), CliError> {
    let m = s.params.m.ok_or_else(|| invalid(format!("params.m is required for {}", s.system)))?;
    let rho = s.params.rho.ok_or_else(|| invalid(format!("params.rho is required for {}", s.system)))?;
    Ok((m, rho))
}

fn initial_g(s: &Scenario) -> Result<DMatrix<f64>, CliError> {
    let n = s.n;
    match &s.initial.g {
        None => Ok(DMatrix::identity(n, n)),
        Some(rows) => {
            let m = matrix(n, n, rows, "initial.g")?;
            Rotation::new(m).map(Rotation::into_matrix).map_err(|e| invalid(format!("initial.g: {e}")))
        }
    }
}

fn inertia(spec: &InertiaSpec, n: usize, s: &Scenario) -> Result<InertiaOperator, CliError> {
    let nb = bivector_dim(n);
    let op = match spec {
        InertiaSpec::Identity => InertiaOperator::identity(n),
        InertiaSpec::Scalar { value } => InertiaOperator::scalar(n, *value)?,
        InertiaSpec::Diagonal { values } => {
            check_len(values.len(), nb, "inertia.values")?;
            InertiaOperator::diagonal(n, values)?
        }
        InertiaSpec::RigidBody { moments } => {
            check_len(moments.len(), n, "inertia.moments")?;
            let d: Vec<f64> = bivector_pairs(n).map(|(i, j)| moments[i] + moments[j]).collect();
            InertiaOperator::diagonal(n, &d)?
        }
        InertiaSpec::Special { a, c } => {
            check_len(a.len(), n, "inertia.a")?;
            let c = match c {
                Some(c) => *c,
                None => {
                    let (m, rho) =
                        mass_radius(s).map_err(|_| invalid("inertia.c or params.m and params.rho are required"))?;
                    m * rho * rho
                }
            };
            InertiaOperator::special(a, c)?
        }
        InertiaSpec::Dense { matrix: rows } => InertiaOperator::dense(n, matrix(nb, nb, rows, "inertia.matrix")?)?,
        InertiaSpec::Vector3 { matrix: rows } => {
            if n != 3 {
                return Err(invalid("inertia kind vector3 needs n = 3"));
            }
            let m = matrix(3, 3, rows, "inertia.matrix")?;
            InertiaOperator::from_vector_inertia(&Matrix3::from_iterator(m.iter().cloned()))?
        }
    };
    Ok(op)
}

/// `Π⁰` may be semidefinite, so dense input is only required to be symmetric.
fn symmetric_operator(spec: &InertiaSpec, n: usize, s: &Scenario) -> Result<InertiaOperator, CliError> {
    match spec {
        InertiaSpec::Dense { matrix: rows } => {
            let nb = bivector_dim(n);
            Ok(InertiaOperator::symmetric(n, matrix(nb, nb, rows, "pi0.matrix")?)?)
        }
        InertiaSpec::Diagonal { values } => {
            check_len(values.len(), bivector_dim(n), "pi0.values")?;
            Ok(InertiaOperator::symmetric(n, DMatrix::from_diagonal(&DVector::from_column_slice(values)))?)
        }
        other => inertia(other, n, s),
    }
}

pub fn subspace(n: usize, spec: &SubspaceSpec, what: &str) -> Result<SubspaceBasis, CliError> {
    Ok(SubspaceBasis::orthonormal_basis_of(n, &generators(n, spec, what)?)?.basis)
}

fn subspace_sum(n: usize, specs: &[SubspaceSpec], what: &str) -> Result<SubspaceBasis, CliError> {
    let mut gens = Vec::new();
    for (i, s) in specs.iter().enumerate() {
        gens.extend(generators(n, s, &format!("{what}[{i}]"))?);
    }
    Ok(SubspaceBasis::orthonormal_basis_of(n, &gens)?.basis)
}

fn generators(n: usize, spec: &SubspaceSpec, what: &str) -> Result<Vec<SkewMatrix>, CliError> {
    let mut gens = Vec::new();
    for (k, [x, y]) in spec.pairs.iter().enumerate() {
        let label = format!("{what}.pairs[{k}]");
        gens.push(wedge(&vector(n, x, &label)?, &vector(n, y, &label)?)?);
    }
    for (k, c) in spec.bivectors.iter().enumerate() {
        gens.push(skew(n, c, &format!("{what}.bivectors[{k}]"))?);
    }
    if let Some(v) = &spec.wedge_with {
        let gamma = unit_param(n, v, &format!("{what}.wedge-with"))?;
        gens.extend(SubspaceBasis::wedge_with(&gamma).elements().iter().cloned());
    }
    Ok(gens)
}

fn check_len(found: usize, expected: usize, what: &str) -> Result<(), CliError> {
    if found != expected {
        return Err(invalid(format!("{what} has {found} entries, expected {expected}")));
    }
    Ok(())
}

fn vector(n: usize, v: &[f64], what: &str) -> Result<DVector<f64>, CliError> {
    check_len(v.len(), n, what)?;
    Ok(DVector::from_column_slice(v))
}

fn vector3(v: &[f64], what: &str) -> Result<Vector3<f64>, CliError> {
    check_len(v.len(), 3, what)?;
    Ok(Vector3::new(v[0], v[1], v[2]))
}

/// Parameter directions are normalized on input.
fn unit_param(n: usize, v: &[f64], what: &str) -> Result<UnitVector, CliError> {
    UnitVector::normalized(vector(n, v, what)?).map_err(|e| invalid(format!("{what}: {e}")))
}

fn skew(n: usize, c: &[f64], what: &str) -> Result<SkewMatrix, CliError> {
    check_len(c.len(), bivector_dim(n), what)?;
    Ok(SkewMatrix::from_coords(n, c)?)
}

fn matrix(rows: usize, cols: usize, data: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CliError> {
    check_len(data.len(), rows, &format!("{what} (rows)"))?;
    for (i, r) in data.iter().enumerate() {
        check_len(r.len(), cols, &format!("{what}[{i}]"))?;
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| data[i][j]))
}
