//! Fixed-step integrators on `SO(n)^k × ℝ^m` and the Chaplygin time change.

mod hermite;
mod reparam;

pub use hermite::{hermite_cubic, resample};
pub use reparam::{cumulative_tau, integrate_reparametrized, retime_trajectory, ReparametrizedTrajectory, TimeScaled};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::error::{Error, Result};
use crate::liecore::expm::expm;
use crate::liecore::{Rotation, SkewMatrix};
use crate::phase::{PhasePoint, PhaseVelocity, System};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical RK4 in the ambient matrix space followed by polar projection.
    #[default]
    Rk4Projected,
    /// Runge-Kutta-Munthe-Kaas of order 4: `g ← g·exp(Θ)`.
    LieRk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4Projected => "rk4-projected",
            Method::LieRk4 => "lie-rk4",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4-projected" => Ok(Method::Rk4Projected),
            "lie-rk4" => Ok(Method::LieRk4),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub h: f64,
    pub steps: usize,
    /// Project group factors and renormalize auxiliary variables every this many steps.
    pub renormalize_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { method: Method::Rk4Projected, h: 1e-3, steps: 1000, renormalize_every: 1 }
    }
}

impl IntegratorConfig {
    pub fn new(method: Method, h: f64, steps: usize) -> Self {
        Self { method, h, steps, renormalize_every: 1 }
    }

    /// Config covering `[0, t_end]` with step `h` (rounded to a whole number of steps).
    pub fn for_duration(method: Method, h: f64, t_end: f64) -> Self {
        Self::new(method, h, (t_end / h).round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step h must be positive, got {}", self.h)));
        }
        if self.renormalize_every == 0 {
            return Err(Error::InvalidParameter("renormalize_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
}

impl Trajectory {
    pub fn single(t0: f64, x0: PhasePoint) -> Self {
        Self { times: vec![t0], states: vec![x0] }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &PhasePoint {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Largest pointwise distance to a trajectory on the same time grid.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        self.states.iter().zip(&other.states).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    /// Every `k`-th state (and the last one), for comparing runs at different step sizes.
    pub fn subsample(&self, k: usize) -> Trajectory {
        let mut out = Trajectory { times: Vec::new(), states: Vec::new() };
        for i in (0..self.len()).step_by(k.max(1)) {
            out.times.push(self.times[i]);
            out.states.push(self.states[i].clone());
        }
        out
    }
}

/// A failed integration: the states computed so far and the step that failed.
#[derive(Clone, Debug, ThisError)]
#[error("integration failed at step {step}: {source}")]
pub struct IntegrationFailure {
    pub step: usize,
    pub source: Error,
    pub partial: Trajectory,
}

impl From<IntegrationFailure> for Error {
    fn from(f: IntegrationFailure) -> Self {
        f.source
    }
}

fn check_shape(x: &PhasePoint, v: &PhaseVelocity) -> Result<()> {
    if x.groups.len() != v.body.len() || x.flat.len() != v.flat.len() {
        return Err(Error::DimensionMismatch { expected: x.flat.len(), found: v.flat.len() });
    }
    Ok(())
}

fn ambient_stage(
    x: &PhasePoint,
    k: &[(Vec<DMatrix<f64>>, nalgebra::DVector<f64>)],
    coeffs: &[f64],
    h: f64,
) -> PhasePoint {
    let mut y = x.clone();
    for ((gs, f), c) in k.iter().zip(coeffs) {
        if *c == 0.0 {
            continue;
        }
        for (yg, kg) in y.groups.iter_mut().zip(gs) {
            *yg += kg * (h * c);
        }
        y.flat += f * (h * c);
    }
    y
}

fn rk4_ambient<S: System + ?Sized>(sys: &S, x: &PhasePoint, h: f64) -> Result<PhasePoint> {
    let slope = |y: &PhasePoint| -> Result<(Vec<DMatrix<f64>>, nalgebra::DVector<f64>)> {
        let v = sys.eval(y)?;
        check_shape(y, &v)?;
        let gs = y.groups.iter().zip(&v.body).map(|(g, w)| g * w.as_matrix()).collect();
        Ok((gs, v.flat))
    };
    let k1 = slope(x)?;
    let k2 = slope(&ambient_stage(x, std::slice::from_ref(&k1), &[0.5], h))?;
    let k3 = slope(&ambient_stage(x, std::slice::from_ref(&k2), &[0.5], h))?;
    let k4 = slope(&ambient_stage(x, std::slice::from_ref(&k3), &[1.0], h))?;
    Ok(ambient_stage(x, &[k1, k2, k3, k4], &[1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0], h))
}

/// Truncated `dexp⁻¹_{-Θ}(A) = A + ½[Θ, A] + (1/12)[Θ, [Θ, A]]`, enough for order 4.
fn dexpinv(theta: &SkewMatrix, a: &SkewMatrix) -> SkewMatrix {
    let t1 = theta.bracket(a);
    let t2 = theta.bracket(&t1);
    a + &(t1 * 0.5) + t2 * (1.0 / 12.0)
}

fn rkmk4<S: System + ?Sized>(sys: &S, x: &PhasePoint, h: f64) -> Result<PhasePoint> {
    let ng = x.groups.len();
    // Stage state from algebra increments Θ_k and flat increment.
    let stage = |thetas: &[SkewMatrix], dflat: &nalgebra::DVector<f64>| -> PhasePoint {
        let groups = x.groups.iter().zip(thetas).map(|(g, t)| g * expm(t.as_matrix())).collect();
        PhasePoint::new(groups, &x.flat + dflat)
    };
    let slope = |y: &PhasePoint, thetas: &[SkewMatrix]| -> Result<(Vec<SkewMatrix>, nalgebra::DVector<f64>)> {
        let v = sys.eval(y)?;
        check_shape(y, &v)?;
        let ks = v.body.iter().zip(thetas).map(|(w, t)| dexpinv(t, w)).collect();
        Ok((ks, v.flat))
    };
    let zeros: Vec<SkewMatrix> = x.groups.iter().map(|g| SkewMatrix::zeros(g.nrows())).collect();
    let scale = |ks: &[SkewMatrix], c: f64| -> Vec<SkewMatrix> { ks.iter().map(|k| k * (h * c)).collect() };

    let (k1, f1) = slope(x, &zeros)?;
    let th2 = scale(&k1, 0.5);
    let (k2, f2) = slope(&stage(&th2, &(&f1 * (0.5 * h))), &th2)?;
    let th3 = scale(&k2, 0.5);
    let (k3, f3) = slope(&stage(&th3, &(&f2 * (0.5 * h))), &th3)?;
    let th4 = scale(&k3, 1.0);
    let (k4, f4) = slope(&stage(&th4, &(&f3 * h)), &th4)?;
    let theta: Vec<SkewMatrix> =
        (0..ng).map(|i| (&k1[i] + &(&k2[i] * 2.0) + (&k3[i] * 2.0) + k4[i].clone()) * (h / 6.0)).collect();
    let dflat = (f1 + f2 * 2.0 + f3 * 2.0 + f4) * (h / 6.0);
    Ok(stage(&theta, &dflat))
}

/// One step without any projection.
pub fn step_raw<S: System + ?Sized>(sys: &S, x: &PhasePoint, h: f64, method: Method) -> Result<PhasePoint> {
    if h == 0.0 {
        return Ok(x.clone());
    }
    match method {
        Method::Rk4Projected => rk4_ambient(sys, x, h),
        Method::LieRk4 => rkmk4(sys, x, h),
    }
}

/// Polar projection of the group factors and renormalization of auxiliary variables.
pub fn project<S: System + ?Sized>(sys: &S, x: &mut PhasePoint) -> Result<()> {
    for g in x.groups.iter_mut() {
        *g = Rotation::project(g)?.into_matrix();
    }
    sys.renormalize(x);
    Ok(())
}

/// One step followed by projection: the unit of [`integrate`].
pub fn step<S: System + ?Sized>(sys: &S, x: &PhasePoint, h: f64, method: Method) -> Result<PhasePoint> {
    let mut y = step_raw(sys, x, h, method)?;
    if h != 0.0 {
        project(sys, &mut y)?;
    }
    Ok(y)
}

fn check_finite(y: &PhasePoint) -> Result<()> {
    if y.flat.iter().chain(y.groups.iter().flat_map(|g| g.iter())).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("state became non-finite".into()));
    }
    Ok(())
}

pub fn integrate<S: System + ?Sized>(
    sys: &S,
    x0: &PhasePoint,
    cfg: &IntegratorConfig,
) -> std::result::Result<Trajectory, IntegrationFailure> {
    integrate_with(sys, x0, cfg, |_, _, _| {})
}

/// [`integrate`] with a hook called on every accepted state `(index, t, x)`.
pub fn integrate_with<S: System + ?Sized>(
    sys: &S,
    x0: &PhasePoint,
    cfg: &IntegratorConfig,
    mut hook: impl FnMut(usize, f64, &PhasePoint),
) -> std::result::Result<Trajectory, IntegrationFailure> {
    let mut traj = Trajectory::single(0.0, x0.clone());
    if let Err(source) = cfg.validate() {
        return Err(IntegrationFailure { step: 0, source, partial: traj });
    }
    hook(0, 0.0, x0);
    let mut x = x0.clone();
    for i in 1..=cfg.steps {
        let result = step_raw(sys, &x, cfg.h, cfg.method).and_then(|mut y| {
            check_finite(&y)?;
            if i % cfg.renormalize_every == 0 {
                project(sys, &mut y)?;
                check_finite(&y)?;
            }
            Ok(y)
        });
        match result {
            Ok(y) => {
                let t = i as f64 * cfg.h;
                hook(i, t, &y);
                traj.times.push(t);
                traj.states.push(y.clone());
                x = y;
            }
            Err(source) => return Err(IntegrationFailure { step: i, source, partial: traj }),
        }
    }
    Ok(traj)
}
