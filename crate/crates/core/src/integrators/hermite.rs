//! Cubic Hermite interpolation of trajectories using the vector field for slopes.

use nalgebra::{DMatrix, DVector};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::phase::{PhasePoint, System};

/// Hermite basis weights `(h00, h10, h01, h11)` at `s ∈ [0, 1]`.
fn weights(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2)
}

/// Cubic through `(t0, y0)`, `(t1, y1)` with slopes `d0`, `d1`, evaluated at `t`.
pub fn hermite_cubic(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let dt = t1 - t0;
    let (a, b, c, d) = weights((t - t0) / dt);
    a * y0 + b * dt * d0 + c * y1 + d * dt * d1
}

fn ambient_slope<S: System + ?Sized>(sys: &S, x: &PhasePoint) -> Result<(Vec<DMatrix<f64>>, DVector<f64>)> {
    let v = sys.eval(x)?;
    let gs = x.groups.iter().zip(&v.body).map(|(g, w)| g * w.as_matrix()).collect();
    Ok((gs, v.flat))
}

/// Interpolates a trajectory at arbitrary times inside its range. Group factors
/// are interpolated entrywise and are orthogonal only to interpolation accuracy.
pub fn resample<S: System + ?Sized>(sys: &S, traj: &Trajectory, times: &[f64]) -> Result<Trajectory> {
    let t_first = traj.times[0];
    let t_last = traj.final_time();
    let mut out = Trajectory { times: Vec::with_capacity(times.len()), states: Vec::with_capacity(times.len()) };
    let mut cache: Option<(usize, (Vec<DMatrix<f64>>, DVector<f64>), (Vec<DMatrix<f64>>, DVector<f64>))> = None;
    for &t in times {
        if t < t_first - 1e-12 || t > t_last + 1e-12 {
            return Err(Error::InvalidParameter(format!("time {t} outside [{t_first}, {t_last}]")));
        }
        let i = match traj.times.partition_point(|&s| s <= t) {
            0 => 0,
            k => (k - 1).min(traj.len().saturating_sub(2)),
        };
        if traj.len() == 1 {
            out.times.push(t);
            out.states.push(traj.states[0].clone());
            continue;
        }
        if cache.as_ref().map(|c| c.0) != Some(i) {
            cache = Some((i, ambient_slope(sys, &traj.states[i])?, ambient_slope(sys, &traj.states[i + 1])?));
        }
        let (_, d0, d1) = cache.as_ref().expect("filled above");
        let (t0, t1) = (traj.times[i], traj.times[i + 1]);
        let dt = t1 - t0;
        let (a, b, c, d) = weights((t - t0) / dt);
        let (x0, x1) = (&traj.states[i], &traj.states[i + 1]);
        let groups = (0..x0.groups.len())
            .map(|k| &x0.groups[k] * a + &d0.0[k] * (b * dt) + &x1.groups[k] * c + &d1.0[k] * (d * dt))
            .collect();
        let flat = &x0.flat * a + &d0.1 * (b * dt) + &x1.flat * c + &d1.1 * (d * dt);
        out.times.push(t);
        out.states.push(PhasePoint::new(groups, flat));
    }
    Ok(out)
}
