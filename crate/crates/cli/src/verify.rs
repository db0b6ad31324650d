//! The diagnostic battery run by `verify`.

use lrmech::batch::par_map;
use lrmech::diagnostics::{
    chaplygin_density, conservation_report, cotangent_chart, density_exponent_fit, epsilon_limit_study,
    euler_top_chart, lplusr_chart, lplusr_density, lr_chart, lr_density, max_constraint_residuals, measure_divergence,
    reconstruct_contact, reconstruct_w, sym_to_coords,
};
use lrmech::integrators::{integrate, integrate_reparametrized, Trajectory};
use lrmech::liecore::{bivector_dim, SkewMatrix, SubspaceBasis};
use lrmech::operators::{DensityChart, MeasureDensity};
use lrmech::phase::{NoetherLaw, PhasePoint, Quantity, System, SystemKind};
use lrmech::sampling::Sampler;
use lrmech::systems::{
    iso3, iso3_inverse, ClassicalChaplyginSystem, ClassicalRubberSystem, CotangentSystem, CoupledReducedSystem,
    LStarSystem, LrSystem,
};
use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{invalid, CliError};
use crate::setup::{Built, Typed};

pub const DRIFT_TOL: f64 = 1e-8;
pub const CONSTRAINT_TOL: f64 = 1e-8;
pub const REDUCTION_TOL: f64 = 1e-6;
pub const RECONSTRUCT_W_TOL: f64 = 1e-7;
pub const FIELD_TOL: f64 = 1e-10;
pub const EPS_FINAL_TOL: f64 = 1e-4;
pub const DIVERGENCE_TOL: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-5;
pub const EXPONENT_TOL: f64 = 1e-6;
pub const HAMILTONIZATION_TOL: f64 = 1e-6;
pub const CLASSICAL_TOL: f64 = 1e-8;
pub const PROJECTION_TOL: f64 = 1e-7;
pub const CONTACT_TOL: f64 = 1e-9;

#[derive(Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    /// Extra lines printed under the verdict.
    pub table: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail, table: Vec::new() }
    }
}

type CheckFn<'a> = Box<dyn Fn() -> Result<CheckResult, CliError> + Send + Sync + 'a>;

struct Check<'a> {
    name: &'static str,
    needs_trajectory: bool,
    run: CheckFn<'a>,
}

/// Every check name `verify` knows about, for `[diagnostics] checks`.
pub const CHECK_NAMES: [&str; 17] = [
    "energy",
    "constraints",
    "momentum-norm",
    "noether",
    "orbit-norm",
    "trace-integrals",
    "measure",
    "eps-limit",
    "reduction",
    "reconstruct-w",
    "closed-form-field",
    "contact",
    "classical-3d",
    "cotangent-projection",
    "hamiltonization",
    "exponent",
    "lstar-energy",
];

/// Runs the applicable checks; `Ok(None)` when none apply.
pub fn verify(b: &Built) -> Result<Option<Vec<CheckResult>>, CliError> {
    if let Some(names) = &b.scenario.diagnostics.checks {
        if let Some(bad) = names.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
            return Err(invalid(format!("unknown check `{bad}` (known: {})", CHECK_NAMES.join(", "))));
        }
    }
    let has_trajectory = b.cfg.steps > 0;
    let traj =
        if has_trajectory { integrate(b.system(), &b.x0, &b.cfg)? } else { Trajectory::single(0.0, b.x0.clone()) };
    let checks: Vec<Check> = battery(b, &traj)?
        .into_iter()
        .filter(|c| has_trajectory || !c.needs_trajectory)
        .filter(|c| b.scenario.diagnostics.checks.as_ref().is_none_or(|names| names.iter().any(|n| n == c.name)))
        .collect();
    if checks.is_empty() {
        return Ok(None);
    }
    let results = par_map(&checks, |c| {
        (c.run)().map(|mut r| {
            r.name = c.name;
            r
        })
    });
    results.into_iter().collect::<Result<Vec<_>, _>>().map(Some)
}

fn battery<'a>(b: &'a Built, traj: &'a Trajectory) -> Result<Vec<Check<'a>>, CliError> {
    let sys = b.system();
    let n = b.scenario.n;
    let mut checks: Vec<Check<'a>> = Vec::new();
    let mut push = |name: &'static str, needs_trajectory: bool, run: CheckFn<'a>| {
        checks.push(Check { name, needs_trajectory, run })
    };
    push("energy", true, Box::new(move || drift_check("energy", sys, traj, &[Quantity::Energy])));
    if !sys.constraint_residuals(&b.x0)?.is_empty() {
        push(
            "constraints",
            true,
            Box::new(move || {
                let residuals = max_constraint_residuals(sys, traj)?;
                let (name, worst) =
                    residuals
                        .iter()
                        .cloned()
                        .fold((String::new(), 0.0), |acc, (n, r)| if r >= acc.1 { (n, r) } else { acc });
                Ok(CheckResult::new(
                    "constraints",
                    worst < CONSTRAINT_TOL,
                    format!("max |residual| {worst:.3e} at `{name}` (tol {CONSTRAINT_TOL:e})"),
                ))
            }),
        );
    }
    match &b.typed {
        Typed::Lr(lr) => {
            if b.constraints.is_empty() {
                push(
                    "momentum-norm",
                    true,
                    Box::new(move || drift_check("momentum-norm", sys, traj, &[Quantity::MomentumNorm])),
                );
            } else {
                push(
                    "noether",
                    true,
                    Box::new(move || {
                        drift_check("noether", sys, traj, &[Quantity::Noether(NoetherLaw::SpatialMomentum)])
                    }),
                );
            }
            push(
                "measure",
                false,
                Box::new(move || {
                    let (label, a) = lr_measure(lr, &b.x0)?;
                    let (_, z) = lr_measure(lr, traj.last())?;
                    Ok(divergence_result(label, a.max(z)))
                }),
            );
        }
        Typed::LplusR(lpr) if b.scenario.system == SystemKind::Lplusr => {
            push(
                "momentum-norm",
                true,
                Box::new(move || drift_check("momentum-norm", sys, traj, &[Quantity::MomentumNorm])),
            );
            push(
                "measure",
                false,
                Box::new(move || {
                    let nb = bivector_dim(n);
                    let mut worst: f64 = 0.0;
                    for x in [&b.x0, traj.last()] {
                        let sym = sym_to_coords(&lpr.pi_body(&x.groups[0]));
                        let mut y = DVector::zeros(nb + sym.len());
                        y.rows_mut(0, nb).copy_from(&x.flat);
                        y.rows_mut(nb, sym.len()).copy_from(&sym);
                        let chart = lplusr_chart(lpr.inertia());
                        let est = measure_divergence(&chart, &lplusr_density(lpr.inertia()), &y, FD_STEP)?;
                        worst = worst.max(est.value.abs());
                    }
                    Ok(divergence_result("sqrt det(I + Pi)", worst))
                }),
            );
            let eps = &b.scenario.diagnostics.eps;
            if !eps.is_empty() {
                if b.constraints.is_empty() {
                    return Err(invalid("the eps sweep needs `[[constraints]]` for the limiting LR system"));
                }
                let g0 = &b.x0.groups[0];
                let omega0 = SkewMatrix::from_coord_vector(n, &b.x0.flat)?;
                let lr = LrSystem::new(lpr.inertia().clone(), b.constraints.clone())?;
                lr.validate(&lr.state(g0.clone(), &omega0), crate::setup::INITIAL_TOL)
                    .map_err(|e| invalid(format!("eps sweep initial state: {e}")))?;
                push(
                    "eps-limit",
                    true,
                    Box::new(move || {
                        let study = epsilon_limit_study(lpr.inertia(), &b.constraints, g0, &omega0, eps, &b.cfg)?;
                        let last = study.rows.last().map_or(f64::NAN, |r| r.error);
                        let decreasing = study.strictly_decreasing();
                        let mut r = CheckResult::new(
                            "eps-limit",
                            decreasing && last < EPS_FINAL_TOL,
                            format!(
                                "errors {} decreasing, final {last:.3e} (tol {EPS_FINAL_TOL:e}), empirical slope {:.3}",
                                if decreasing { "strictly" } else { "not" },
                                study.slope
                            ),
                        );
                        r.table.push(format!("{:>12}  {:>12}", "eps", "sup error"));
                        for row in &study.rows {
                            r.table.push(format!("{:>12.3e}  {:>12.3e}", row.eps, row.error));
                        }
                        Ok(r)
                    }),
                );
            }
        }
        Typed::Coupled(full) => {
            push(
                "noether",
                true,
                Box::new(move || {
                    drift_check(
                        "noether",
                        sys,
                        traj,
                        &[
                            Quantity::Noether(NoetherLaw::PeripheralKernel),
                            Quantity::Noether(NoetherLaw::SpatialMomentum),
                        ],
                    )
                }),
            );
            push(
                "reduction",
                true,
                Box::new(move || {
                    let reduced = CoupledReducedSystem::new(full.params().clone())?;
                    let nb = bivector_dim(n);
                    let x0 = PhasePoint::new(b.x0.groups.clone(), b.x0.flat.rows(0, nb).into_owned());
                    let tr = integrate(&reduced, &x0, &b.cfg)?;
                    let mut worst: f64 = 0.0;
                    for (a, r) in traj.states.iter().zip(&tr.states) {
                        worst =
                            worst.max((&a.groups[0] - &r.groups[0]).amax()).max((a.flat.rows(0, nb) - &r.flat).amax());
                    }
                    Ok(CheckResult::new(
                        "reduction",
                        worst < REDUCTION_TOL,
                        format!("full vs reduced sup distance in (g, omega) {worst:.3e} (tol {REDUCTION_TOL:e})"),
                    ))
                }),
            );
            push(
                "reconstruct-w",
                true,
                Box::new(move || {
                    let nb = bivector_dim(n);
                    let w0 = SkewMatrix::from_coord_vector(n, &b.x0.flat.rows(nb, nb).into_owned())?;
                    let ws = reconstruct_w(full, traj, &w0)?;
                    let mut worst: f64 = 0.0;
                    for (x, w) in traj.states.iter().zip(&ws) {
                        worst = worst.max((x.flat.rows(nb, nb) - w.coords()).amax());
                    }
                    Ok(CheckResult::new(
                        "reconstruct-w",
                        worst < RECONSTRUCT_W_TOL,
                        format!("W from (g, omega) vs integrated W sup {worst:.3e} (tol {RECONSTRUCT_W_TOL:e})"),
                    ))
                }),
            );
        }
        Typed::CoupledReduced(_) => {
            push(
                "noether",
                true,
                Box::new(move || drift_check("noether", sys, traj, &[Quantity::Noether(NoetherLaw::SpatialMomentum)])),
            );
        }
        Typed::NCoupled(nc) => {
            let gammas: Option<Vec<SkewMatrix>> = b
                .scenario
                .bodies
                .iter()
                .map(|body| match body.kind {
                    crate::scenario::BodyKind::Commutator => {
                        body.bivector.as_ref().and_then(|c| SkewMatrix::from_coords(n, c).ok())
                    }
                    _ => None,
                })
                .collect();
            if let Some(gammas) = gammas {
                push(
                    "closed-form-field",
                    false,
                    Box::new(move || {
                        let g = &b.x0.groups[0];
                        let nb = bivector_dim(n);
                        let w = SkewMatrix::from_coord_vector(n, &b.x0.flat.rows(0, nb).into_owned())?;
                        let got = nc.eval(&b.x0)?.flat.rows(0, nb).into_owned();
                        // 𝓑ω = Iω + Σ (D_i/ρ_i²)[[γ_i, ω], γ_i] with γ_i = g⁻¹Γ_i g
                        let body: Vec<(SkewMatrix, f64)> = gammas
                            .iter()
                            .zip(&b.scenario.bodies)
                            .map(|(c, spec)| {
                                let gi = SkewMatrix::skew_part(&(g.transpose() * c.as_matrix() * g));
                                (gi, spec.d / (spec.rho * spec.rho))
                            })
                            .collect();
                        let mut bm = DMatrix::zeros(nb, nb);
                        for (j, e) in SubspaceBasis::full(n).elements().iter().enumerate() {
                            let mut col = nc.inertia().apply(e)?;
                            for (gi, c) in &body {
                                col += &(gi.bracket(e).bracket(gi) * *c);
                            }
                            bm.set_column(j, &col.coords());
                        }
                        let rhs = nc.inertia().apply(&w)?.bracket(&w).coords();
                        let expected =
                            bm.lu().solve(&rhs).ok_or_else(|| invalid("closed-form operator is singular"))?;
                        let err = (got - expected).amax();
                        Ok(CheckResult::new(
                            "closed-form-field",
                            err < FIELD_TOL,
                            format!("omega-dot vs double-bracket closed form {err:.3e} (tol {FIELD_TOL:e})"),
                        ))
                    }),
                );
            }
        }
        Typed::Support(_) => {
            push(
                "trace-integrals",
                true,
                Box::new(move || {
                    let qs: Vec<Quantity> = (1..=n).map(|k| Quantity::TraceCoefficients { k }).collect();
                    drift_check("trace-integrals", sys, traj, &qs)
                }),
            );
        }
        Typed::RubberChaplygin(rc) => {
            push(
                "contact",
                true,
                Box::new(move || {
                    let r = reconstruct_contact(traj, rc.radius())?;
                    let worst = r.iter().map(|p| (p[n - 1] - r[0][n - 1]).abs()).fold(0.0, f64::max);
                    Ok(CheckResult::new(
                        "contact",
                        worst < CONTACT_TOL,
                        format!("max |r_n(t) - r_n(0)| {worst:.3e} (tol {CONTACT_TOL:e})"),
                    ))
                }),
            );
            push(
                "cotangent-projection",
                true,
                Box::new(move || {
                    let cot = CotangentSystem::new(rc.inertia().clone(), rc.mass(), rc.radius())?;
                    let nb = bivector_dim(n);
                    let omega_of = |x: &PhasePoint| SkewMatrix::from_coord_vector(n, &x.flat.rows(0, nb).into_owned());
                    let y0 = cot.from_group(&b.x0.groups[0], &omega_of(&b.x0)?)?;
                    let tc = integrate(&cot, &y0, &b.cfg)?;
                    let mut worst: f64 = 0.0;
                    for (x, y) in traj.states.iter().zip(&tc.states) {
                        let projected = cot.from_group(&x.groups[0], &omega_of(x)?)?;
                        worst = worst.max((projected.flat - &y.flat).amax());
                    }
                    Ok(CheckResult::new(
                        "cotangent-projection",
                        worst < PROJECTION_TOL,
                        format!(
                            "projected group flow vs reduced (gamma, p) flow sup {worst:.3e} (tol {PROJECTION_TOL:e})"
                        ),
                    ))
                }),
            );
            if n == 3 {
                push(
                    "classical-3d",
                    true,
                    Box::new(move || {
                        let classical = ClassicalRubberSystem::new(rc.inertia(), rc.mass(), rc.radius())?;
                        let to_vec = |x: &PhasePoint| -> Result<(Vector3<f64>, Vector3<f64>), CliError> {
                            let w = iso3_inverse(&SkewMatrix::from_coord_vector(3, &x.flat)?)?;
                            let gm = rc.gamma(&x.groups[0]);
                            Ok((w, Vector3::new(gm[0], gm[1], gm[2])))
                        };
                        let (w0, g0) = to_vec(&b.x0)?;
                        let tc = integrate(&classical, &classical.state(&w0, &g0), &b.cfg)?;
                        let mut worst: f64 = 0.0;
                        for (x, y) in traj.states.iter().zip(&tc.states) {
                            let (w, gm) = to_vec(x)?;
                            worst = worst
                                .max((w - Vector3::new(y.flat[0], y.flat[1], y.flat[2])).amax())
                                .max((gm - Vector3::new(y.flat[3], y.flat[4], y.flat[5])).amax());
                        }
                        Ok(CheckResult::new(
                            "classical-3d",
                            worst < CLASSICAL_TOL,
                            format!(
                                "n = 3 flow vs vector rubber-ball equations sup {worst:.3e} (tol {CLASSICAL_TOL:e})"
                            ),
                        ))
                    }),
                );
            }
        }
        Typed::Cotangent(cot) => {
            push(
                "measure",
                false,
                Box::new(move || {
                    let mut worst: f64 = 0.0;
                    for x in [&b.x0, traj.last()] {
                        let est = measure_divergence(&cotangent_chart(cot), &chaplygin_density(cot), &x.flat, FD_STEP)?;
                        worst = worst.max(est.value.abs());
                    }
                    Ok(divergence_result("1/sqrt det(J|h^gamma)", worst))
                }),
            );
            if let Some(a) = &b.special_a {
                push("hamiltonization", true, Box::new(move || hamiltonization(cot, a, b)));
                push(
                    "exponent",
                    false,
                    Box::new(move || {
                        let mut s = Sampler::new(0x5eed);
                        let gammas: Vec<DVector<f64>> = (0..50).map(|_| s.unit_vector(n).into_vector()).collect();
                        let slope = density_exponent_fit(cot, &gammas)?;
                        let expected = -(n as f64 - 2.0) / 2.0;
                        let err = (slope - expected).abs();
                        Ok(CheckResult::new(
                            "exponent",
                            err < EXPONENT_TOL,
                            format!("fitted density exponent {slope:.9} vs {expected} (tol {EXPONENT_TOL:e})"),
                        ))
                    }),
                );
            }
        }
        Typed::LStar(_) => {
            push(
                "lstar-energy",
                true,
                Box::new(move || drift_check("lstar-energy", sys, traj, &[Quantity::LStarEnergy])),
            );
        }
        Typed::Gsr(gsr) => {
            push(
                "momentum-norm",
                true,
                Box::new(move || drift_check("momentum-norm", sys, traj, &[Quantity::MomentumNorm])),
            );
            push("orbit-norm", true, Box::new(move || drift_check("orbit-norm", sys, traj, &[Quantity::OrbitNorm])));
            if n == 3 {
                push(
                    "classical-3d",
                    false,
                    Box::new(move || {
                        let classical = ClassicalChaplyginSystem::new(gsr.inertia(), gsr.m_rho2(), 1.0)?;
                        let mut worst: f64 = 0.0;
                        for x in &traj.states {
                            let w = iso3_inverse(&SkewMatrix::from_coord_vector(3, &x.flat.rows(0, 3).into_owned())?)?;
                            let gm = iso3_inverse(&SkewMatrix::from_coord_vector(3, &x.flat.rows(3, 3).into_owned())?)?;
                            let va = gsr.eval(&gsr.state(&iso3(&w), &iso3(&gm)))?;
                            let vb = classical.eval(&classical.state(&w, &gm))?;
                            let dw =
                                iso3_inverse(&SkewMatrix::from_coord_vector(3, &va.flat.rows(0, 3).into_owned())?)?;
                            let dg =
                                iso3_inverse(&SkewMatrix::from_coord_vector(3, &va.flat.rows(3, 3).into_owned())?)?;
                            worst = worst
                                .max((dw - Vector3::new(vb.flat[0], vb.flat[1], vb.flat[2])).amax())
                                .max((dg - Vector3::new(vb.flat[3], vb.flat[4], vb.flat[5])).amax());
                        }
                        Ok(CheckResult::new(
                            "classical-3d",
                            worst < FIELD_TOL,
                            format!("n = 3 field vs classical Chaplygin sphere {worst:.3e} (tol {FIELD_TOL:e})"),
                        ))
                    }),
                );
            }
        }
        _ => {}
    }
    Ok(checks)
}

fn drift_check(
    name: &'static str,
    sys: &dyn System,
    traj: &Trajectory,
    qs: &[Quantity],
) -> Result<CheckResult, CliError> {
    let report = conservation_report(sys, traj, qs)?;
    let worst = report
        .entries
        .iter()
        .max_by(|a, b| a.max_rel_drift.total_cmp(&b.max_rel_drift))
        .expect("at least one quantity");
    Ok(CheckResult::new(
        name,
        worst.max_rel_drift < DRIFT_TOL,
        format!("max relative drift {:.3e} in {} (tol {DRIFT_TOL:e})", worst.max_rel_drift, worst.name),
    ))
}

/// `value` is the largest `|div(μf)|` over the initial and final states.
fn divergence_result(label: &str, value: f64) -> CheckResult {
    CheckResult::new(
        "measure",
        value < DIVERGENCE_TOL,
        format!("|div(mu f)| {value:.3e} at the initial and final states for mu = {label} (tol {DIVERGENCE_TOL:e})"),
    )
}

/// Density label and `|div(μf)|` at `x0` in the LR chart.
fn lr_measure(lr: &LrSystem, x0: &PhasePoint) -> Result<(&'static str, f64), CliError> {
    let n = lr.n();
    let nb = bivector_dim(n);
    let k = lr.constraints().dim();
    let omega = lr.omega(x0);
    if k == 0 {
        let est = measure_divergence(
            &euler_top_chart(lr.inertia()),
            &MeasureDensity::constant(DensityChart::EulerTop, 1.0),
            &omega.coords(),
            FD_STEP,
        )?;
        return Ok(("1", est.value.abs()));
    }
    let alphas = lr.alphas(&x0.groups[0]);
    let mut y = DVector::zeros(nb * (1 + k));
    y.rows_mut(0, nb).copy_from(&lr.inertia().apply(&omega)?.coords());
    for c in 0..k {
        y.rows_mut(nb * (1 + c), nb).copy_from(&alphas.column(c));
    }
    let est = measure_divergence(&lr_chart(lr.inertia(), k), &lr_density(lr.inertia(), k), &y, FD_STEP)?;
    Ok(("sqrt det <I^-1 alpha_i, alpha_j>", est.value.abs()))
}

/// τ-reparametrized cotangent flow against the `L*` geodesic flow over the same `τ` range.
fn hamiltonization(cot: &CotangentSystem, a: &[f64], b: &Built) -> Result<CheckResult, CliError> {
    let n = cot.n();
    let reparam = integrate_reparametrized(cot, &b.x0, a, &b.cfg)?;
    let lstar = LStarSystem::new(a)?;
    let gamma0 = b.x0.flat.rows(0, n).into_owned();
    let xi0 = cot.velocity(&gamma0, &b.x0.flat.rows(n, n).into_owned())?;
    let geo = integrate(&lstar, &lstar.from_time_velocity(&gamma0, &xi0)?, &b.cfg)?;
    let mut worst: f64 = 0.0;
    for (x, y) in reparam.states.iter().zip(&geo.states) {
        let gamma = x.flat.rows(0, n).into_owned();
        let xi = cot.velocity(&gamma, &x.flat.rows(n, n).into_owned())?;
        let s = lstar.s(&gamma);
        worst = worst.max((&gamma - y.flat.rows(0, n)).amax()).max((xi * s.sqrt() - y.flat.rows(n, n)).amax());
    }
    let energy = conservation_report(&lstar, &geo, &[Quantity::LStarEnergy])?.entries[0].max_rel_drift;
    Ok(CheckResult::new(
        "hamiltonization",
        worst < HAMILTONIZATION_TOL && energy < DRIFT_TOL,
        format!(
            "reparametrized flow vs L* geodesics sup {worst:.3e} (tol {HAMILTONIZATION_TOL:e}); L* energy drift {energy:.3e}"
        ),
    ))
}
