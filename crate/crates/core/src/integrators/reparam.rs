//! The time change `dτ = dt / √(Aγ,γ)`, with `γ` stored in the first `n` flat coordinates.
//!
//! Two independent routes: integrate the `τ`-rescaled field augmented with `t`,
//! or integrate in `t` and convert by quadrature plus interpolation.

use nalgebra::DVector;

use super::hermite::hermite_cubic;
use super::{integrate, resample, IntegrationFailure, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::phase::{PhasePoint, PhaseVelocity, Quantity, StateLayout, System, SystemKind};

#[derive(Clone, Debug, PartialEq)]
pub struct ReparametrizedTrajectory {
    pub tau: Vec<f64>,
    pub t: Vec<f64>,
    pub states: Vec<PhasePoint>,
}

impl ReparametrizedTrajectory {
    /// The states as a trajectory in `τ`.
    pub fn in_tau(&self) -> Trajectory {
        Trajectory { times: self.tau.clone(), states: self.states.clone() }
    }
}

fn sigma(a: &DVector<f64>, x: &PhasePoint) -> Result<f64> {
    let n = a.len();
    if x.flat.len() < n {
        return Err(Error::DimensionMismatch { expected: n, found: x.flat.len() });
    }
    let gamma = x.flat.rows(0, n);
    let s = a.component_mul(&gamma).dot(&gamma);
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("(Aγ,γ) = {s} is not positive")));
    }
    Ok(s.sqrt())
}

fn check_a(a: &[f64]) -> Result<DVector<f64>> {
    if a.is_empty() || a.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("A must have positive entries".into()));
    }
    Ok(DVector::from_column_slice(a))
}

/// `dx/dτ = √(Aγ,γ) f(x)`, `dt/dτ = √(Aγ,γ)`; `t` is appended to the flat part.
pub struct TimeScaled<'a, S: System + ?Sized> {
    inner: &'a S,
    a: DVector<f64>,
}

impl<'a, S: System + ?Sized> TimeScaled<'a, S> {
    pub fn new(inner: &'a S, a: &[f64]) -> Result<Self> {
        Ok(Self { inner, a: check_a(a)? })
    }

    pub fn augment(&self, x: &PhasePoint, t: f64) -> PhasePoint {
        let m = x.flat.len();
        let mut flat = DVector::zeros(m + 1);
        flat.rows_mut(0, m).copy_from(&x.flat);
        flat[m] = t;
        PhasePoint::new(x.groups.clone(), flat)
    }

    /// Drops the appended time, returning `(x, t)`.
    pub fn split(&self, y: &PhasePoint) -> (PhasePoint, f64) {
        let m = y.flat.len() - 1;
        (PhasePoint::new(y.groups.clone(), y.flat.rows(0, m).into_owned()), y.flat[m])
    }
}

impl<S: System + ?Sized> System for TimeScaled<'_, S> {
    fn kind(&self) -> SystemKind {
        self.inner.kind()
    }

    fn layout(&self) -> StateLayout {
        let mut l = self.inner.layout();
        l.flat.push("t".into());
        l
    }

    fn eval(&self, y: &PhasePoint) -> Result<PhaseVelocity> {
        let (x, _) = self.split(y);
        let s = sigma(&self.a, &x)?;
        let v = self.inner.eval(&x)?;
        let m = v.flat.len();
        let mut flat = DVector::zeros(m + 1);
        flat.rows_mut(0, m).copy_from(&(v.flat * s));
        flat[m] = s;
        Ok(PhaseVelocity { body: v.body.into_iter().map(|w| w * s).collect(), flat })
    }

    fn renormalize(&self, y: &mut PhasePoint) {
        let (mut x, t) = self.split(y);
        self.inner.renormalize(&mut x);
        *y = self.augment(&x, t);
    }

    fn energy(&self, y: &PhasePoint) -> Result<f64> {
        self.inner.energy(&self.split(y).0)
    }

    fn constraint_residuals(&self, y: &PhasePoint) -> Result<Vec<(String, f64)>> {
        self.inner.constraint_residuals(&self.split(y).0)
    }

    fn extra_quantity(&self, q: &Quantity, y: &PhasePoint) -> Result<DVector<f64>> {
        self.inner.extra_quantity(q, &self.split(y).0)
    }
}

/// Integrates the `τ`-rescaled field: `cfg.h` is the `τ` step.
pub fn integrate_reparametrized<S: System + ?Sized>(
    sys: &S,
    x0: &PhasePoint,
    a: &[f64],
    cfg: &IntegratorConfig,
) -> std::result::Result<ReparametrizedTrajectory, IntegrationFailure> {
    let scaled = match TimeScaled::new(sys, a) {
        Ok(s) => s,
        Err(source) => {
            return Err(IntegrationFailure { step: 0, source, partial: Trajectory::single(0.0, x0.clone()) })
        }
    };
    let strip = |traj: Trajectory| {
        let mut out = ReparametrizedTrajectory { tau: traj.times, t: Vec::new(), states: Vec::new() };
        for y in &traj.states {
            let (x, t) = scaled.split(y);
            out.t.push(t);
            out.states.push(x);
        }
        out
    };
    match integrate(&scaled, &scaled.augment(x0, 0.0), cfg) {
        Ok(traj) => Ok(strip(traj)),
        Err(f) => {
            let partial = strip(f.partial);
            Err(IntegrationFailure {
                step: f.step,
                source: f.source,
                partial: Trajectory { times: partial.tau, states: partial.states },
            })
        }
    }
}

/// `τ(t_i) = ∫ dt/√(Aγ,γ)` by the endpoint-corrected trapezoid rule, which is
/// exact for cubics: `Δτ = h/2 (f₀+f₁) + h²/12 (f₀′-f₁′)`.
pub fn cumulative_tau<S: System + ?Sized>(sys: &S, traj: &Trajectory, a: &[f64]) -> Result<Vec<f64>> {
    let a = check_a(a)?;
    let n = a.len();
    let mut f = Vec::with_capacity(traj.len());
    let mut df = Vec::with_capacity(traj.len());
    for x in &traj.states {
        let s = sigma(&a, x)?;
        let v = sys.eval(x)?;
        let gamma = x.flat.rows(0, n);
        let sdot = 2.0 * a.component_mul(&gamma).dot(&v.flat.rows(0, n));
        f.push(1.0 / s);
        df.push(-0.5 * sdot / (s * s * s));
    }
    let mut tau = vec![0.0; traj.len()];
    for i in 1..traj.len() {
        let h = traj.times[i] - traj.times[i - 1];
        tau[i] = tau[i - 1] + 0.5 * h * (f[i - 1] + f[i]) + h * h / 12.0 * (df[i - 1] - df[i]);
    }
    Ok(tau)
}

/// Converts a `t`-trajectory to the `τ` grid `0, h_τ, 2h_τ, …` covered by it.
pub fn retime_trajectory<S: System + ?Sized>(
    sys: &S,
    traj: &Trajectory,
    a: &[f64],
    h_tau: f64,
) -> Result<ReparametrizedTrajectory> {
    if !(h_tau > 0.0) {
        return Err(Error::InvalidParameter(format!("τ step must be positive, got {h_tau}")));
    }
    let av = check_a(a)?;
    let tau = cumulative_tau(sys, traj, a)?;
    let fs: Vec<f64> = traj.states.iter().map(|x| sigma(&av, x).map(|s| 1.0 / s)).collect::<Result<_>>()?;
    let tau_end = *tau.last().expect("nonempty");
    let count = (tau_end / h_tau + 1e-9).floor() as usize;
    let mut targets_t = Vec::with_capacity(count + 1);
    let mut taus = Vec::with_capacity(count + 1);
    let mut i = 0;
    for k in 0..=count {
        let target = k as f64 * h_tau;
        while i + 2 < tau.len() && tau[i + 1] < target {
            i += 1;
        }
        let t = if tau.len() == 1 {
            traj.times[0]
        } else {
            invert_on_interval(traj.times[i], traj.times[i + 1], tau[i], tau[i + 1], fs[i], fs[i + 1], target)
        };
        targets_t.push(t);
        taus.push(target);
    }
    let states = resample(sys, traj, &targets_t)?.states;
    Ok(ReparametrizedTrajectory { tau: taus, t: targets_t, states })
}

/// Solves `τ(t) = target` for the monotone Hermite cubic on `[t0, t1]`.
fn invert_on_interval(t0: f64, t1: f64, tau0: f64, tau1: f64, f0: f64, f1: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (t0, t1);
    let mut t = t0 + (t1 - t0) * ((target - tau0) / (tau1 - tau0)).clamp(0.0, 1.0);
    for _ in 0..60 {
        let val = hermite_cubic(t0, t1, tau0, tau1, f0, f1, t) - target;
        if val.abs() < 1e-16 {
            break;
        }
        if val > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let eps = 1e-7 * (t1 - t0);
        let slope = (hermite_cubic(t0, t1, tau0, tau1, f0, f1, t + eps)
            - hermite_cubic(t0, t1, tau0, tau1, f0, f1, t - eps))
            / (2.0 * eps);
        let next = t - val / slope;
        t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * (t1 - t0).max(1.0) {
            break;
        }
    }
    t
}
