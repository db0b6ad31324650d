use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrators::Trajectory;
use crate::phase::{Quantity, System};

/// Drift of one quantity along a trajectory. Vector quantities use the max norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantityDrift {
    pub name: String,
    pub initial: Vec<f64>,
    pub max_abs_drift: f64,
    /// `max_abs_drift / max(‖initial‖_∞, 1e-300)`.
    pub max_rel_drift: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConservationReport {
    pub entries: Vec<QuantityDrift>,
}

impl ConservationReport {
    pub fn get(&self, name: &str) -> Option<&QuantityDrift> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub fn conservation_report<S: System + ?Sized>(
    sys: &S,
    traj: &Trajectory,
    quantities: &[Quantity],
) -> Result<ConservationReport> {
    let first = traj.states.first().ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let mut entries = Vec::with_capacity(quantities.len());
    for q in quantities {
        let q0 = sys.quantity(q, first)?;
        let mut drift: f64 = 0.0;
        for x in &traj.states[1..] {
            let v: DVector<f64> = sys.quantity(q, x)?;
            drift = drift.max((v - &q0).amax());
        }
        let scale = q0.amax().max(1e-300);
        entries.push(QuantityDrift {
            name: q.to_string(),
            initial: q0.iter().cloned().collect(),
            max_abs_drift: drift,
            max_rel_drift: drift / scale,
        });
    }
    Ok(ConservationReport { entries })
}

/// Largest absolute value of every named constraint residual along the trajectory.
pub fn max_constraint_residuals<S: System + ?Sized>(sys: &S, traj: &Trajectory) -> Result<Vec<(String, f64)>> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for x in &traj.states {
        for (i, (name, r)) in sys.constraint_residuals(x)?.into_iter().enumerate() {
            match out.get_mut(i) {
                Some(slot) => slot.1 = slot.1.max(r.abs()),
                None => out.push((name, r.abs())),
            }
        }
    }
    Ok(out)
}
