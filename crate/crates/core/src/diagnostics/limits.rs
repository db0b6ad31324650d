//! The `ε → ∞` limit of L+R systems with `Π⁰ = ε Σ a_i ⊗ a_i`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::measure::linear_fit;
use crate::batch::par_map;
use crate::error::{Error, Result};
use crate::integrators::{integrate, IntegratorConfig};
use crate::liecore::{SkewMatrix, SubspaceBasis};
use crate::operators::InertiaOperator;
use crate::systems::{LplusRMode, LplusRSystem, LrSystem};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub eps: f64,
    /// Sup-norm distance between the L+R and LR trajectories in `(g, ω)`.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonStudy {
    pub rows: Vec<EpsilonRow>,
    /// Least-squares slope of `log error` against `log ε` (empirical rate).
    pub slope: f64,
}

impl EpsilonStudy {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

pub fn epsilon_limit_study(
    inertia: &InertiaOperator,
    constraints: &SubspaceBasis,
    g0: &DMatrix<f64>,
    omega0: &SkewMatrix,
    eps_list: &[f64],
    cfg: &IntegratorConfig,
) -> Result<EpsilonStudy> {
    let lr = LrSystem::new(inertia.clone(), constraints.clone())?;
    let x0 = lr.state(g0.clone(), omega0);
    let reference = integrate(&lr, &x0, cfg)?;
    let c = constraints.coordinate_matrix();
    let results = par_map(eps_list, |&eps| -> Result<EpsilonRow> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("ε must be positive, got {eps}")));
        }
        let pi0 = InertiaOperator::symmetric(inertia.dim(), (&c * c.transpose()) * eps)?;
        let sys = LplusRSystem::new(inertia.clone(), pi0, LplusRMode::Nonholonomic)?;
        let traj = integrate(&sys, &sys.state(g0.clone(), omega0), cfg)?;
        Ok(EpsilonRow { eps, error: traj.sup_distance(&reference) })
    });
    let rows: Vec<EpsilonRow> = results.into_iter().collect::<Result<_>>()?;
    let slope = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.error.max(1e-300).ln()).collect();
        linear_fit(&xs, &ys).0
    } else {
        f64::NAN
    };
    Ok(EpsilonStudy { rows, slope })
}
