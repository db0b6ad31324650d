//! Conservation reports, invariant-measure checks, limits and reconstructions.

mod conservation;
mod limits;
mod measure;
mod reconstruct;

pub use conservation::{conservation_report, max_constraint_residuals, ConservationReport, QuantityDrift};
pub use limits::{epsilon_limit_study, EpsilonRow, EpsilonStudy};
pub use measure::{
    chaplygin_density, chaplygin_measure_check, coords_to_sym, cotangent_chart, density_exponent_fit, euler_top_chart,
    linear_fit, lplusr_chart, lplusr_density, lr_chart, lr_density, measure_divergence, special_density, sym_to_coords,
    ChartField, DensityPair, DivergenceEstimate, DEFAULT_FD_STEP,
};
pub use reconstruct::{reconstruct_contact, reconstruct_w};

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::phase::{PhasePoint, Quantity, System};

/// Numerical rank of the Jacobian of the listed quantities with respect to the
/// flat coordinates, by central differences. Returns the rank and singular values.
pub fn quantity_jacobian_rank<S: System + ?Sized>(
    sys: &S,
    x: &PhasePoint,
    quantities: &[Quantity],
    fd_step: f64,
    rel_tol: f64,
) -> Result<(usize, Vec<f64>)> {
    let eval_all = |y: &PhasePoint| -> Result<DVector<f64>> {
        let mut vals = Vec::new();
        for q in quantities {
            vals.extend(sys.quantity(q, y)?.iter().cloned());
        }
        Ok(DVector::from_vec(vals))
    };
    let rows = eval_all(x)?.len();
    let cols = x.flat.len();
    let mut jac = DMatrix::zeros(rows, cols);
    let mut y = x.clone();
    for j in 0..cols {
        y.flat[j] = x.flat[j] + fd_step;
        let fp = eval_all(&y)?;
        y.flat[j] = x.flat[j] - fd_step;
        let fm = eval_all(&y)?;
        y.flat[j] = x.flat[j];
        jac.set_column(j, &((fp - fm) / (2.0 * fd_step)));
    }
    // Normalize rows so that quantities of different scale compete fairly.
    for mut r in jac.row_iter_mut() {
        let norm = r.norm();
        if norm > 0.0 {
            r /= norm;
        }
    }
    let sv = jac.singular_values();
    let mut sv: Vec<f64> = sv.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let top = sv.first().cloned().unwrap_or(0.0);
    let rank = sv.iter().filter(|s| **s > rel_tol * top).count();
    Ok((rank, sv))
}
