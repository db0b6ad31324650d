//! Post-processing of reduced trajectories: contact path and peripheral velocities.

use nalgebra::DVector;

use crate::error::{check_dim, Result};
use crate::integrators::Trajectory;
use crate::liecore::{bivector_dim, SkewMatrix};
use crate::systems::CoupledSystem;

/// `r(t) - r(0) = ρ ∫ Ad_g ω Γ dt` with `Γ = e_n`, by cumulative trapezoids.
/// The states must carry `g` as their first group and `ω` as the leading flat block.
pub fn reconstruct_contact(traj: &Trajectory, rho: f64) -> Result<Vec<DVector<f64>>> {
    let x0 = traj.states.first().expect("trajectory is never empty");
    let g0 = x0.groups.first().ok_or_else(|| crate::Error::InvalidParameter("state has no group".into()))?;
    let n = g0.nrows();
    let nb = bivector_dim(n);
    let velocity = |k: usize| -> Result<DVector<f64>> {
        let x = &traj.states[k];
        check_dim(n, x.groups[0].nrows())?;
        let g = &x.groups[0];
        let w = SkewMatrix::from_coord_vector(n, &x.flat.rows(0, nb).into_owned())?;
        // Ad_g ω Γ = g ω gᵀ e_n
        let gt_en = g.row(n - 1).transpose();
        Ok((g * w.apply(&gt_en)) * rho)
    };
    let mut out = Vec::with_capacity(traj.len());
    let mut r = DVector::zeros(n);
    out.push(r.clone());
    let mut prev = velocity(0)?;
    for k in 1..traj.len() {
        let cur = velocity(k)?;
        let h = traj.times[k] - traj.times[k - 1];
        r += (&prev + &cur) * (0.5 * h);
        out.push(r.clone());
        prev = cur;
    }
    Ok(out)
}

/// `W(t) = pr_𝔨 W₀ - Σ (1/ρ_i) pr_{𝔥_i} Ad_g ω` along a reduced `(g, ω)` trajectory.
pub fn reconstruct_w(sys: &CoupledSystem, traj: &Trajectory, w0: &SkewMatrix) -> Result<Vec<SkewMatrix>> {
    let n = sys.n();
    let nb = bivector_dim(n);
    let kernel_part = sys.kernel().project(w0);
    traj.states
        .iter()
        .map(|x| {
            let g = x.groups.first().ok_or_else(|| crate::Error::InvalidParameter("state has no group".into()))?;
            let w = SkewMatrix::from_coord_vector(n, &x.flat.rows(0, nb).into_owned())?;
            Ok(sys.consistent_w(g, &w, &kernel_part))
        })
        .collect()
}
