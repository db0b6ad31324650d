//! Divergence of `μ f` by central differences in flat charts.
//!
//! Constrained fields are extended to the whole chart by their multiplier
//! formulas, which are defined off the constraint set as well.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::liecore::{ad_matrix, bivector_dim, SkewMatrix, SubspaceBasis, UnitVector};
use crate::operators::{DensityChart, InertiaOperator, MeasureDensity};
use crate::phase::{PhasePoint, System};
use crate::systems::multipliers::{pure_rows, solve_multipliers};
use crate::systems::{CotangentSystem, LplusRMode, LplusRSystem};

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A vector field on `ℝ^dim`.
#[derive(Clone)]
pub struct ChartField {
    pub chart: DensityChart,
    pub dim: usize,
    f: Arc<dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync>,
}

impl std::fmt::Debug for ChartField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartField").field("chart", &self.chart).field("dim", &self.dim).finish()
    }
}

impl ChartField {
    pub fn new(
        chart: DensityChart,
        dim: usize,
        f: impl Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self { chart, dim, f: Arc::new(f) }
    }

    pub fn eval(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim, y.len())?;
        (self.f)(y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceEstimate {
    pub value: f64,
    /// The same estimate with half the step.
    pub halved: f64,
    pub fd_step: f64,
    pub warning: Option<String>,
}

fn central_divergence(field: &ChartField, density: &MeasureDensity, y: &DVector<f64>, h: f64) -> Result<f64> {
    let mut div = 0.0;
    let mut yp = y.clone();
    for i in 0..y.len() {
        yp[i] = y[i] + h;
        let fp = field.eval(&yp)?[i] * density.eval(&yp)?;
        yp[i] = y[i] - h;
        let fm = field.eval(&yp)?[i] * density.eval(&yp)?;
        yp[i] = y[i];
        div += (fp - fm) / (2.0 * h);
    }
    Ok(div)
}

/// `div(μ f)` at `y`, with a warning when halving the step changes the estimate
/// by more than the expected truncation behaviour allows.
pub fn measure_divergence(
    field: &ChartField,
    density: &MeasureDensity,
    y: &DVector<f64>,
    fd_step: f64,
) -> Result<DivergenceEstimate> {
    if field.chart != density.chart {
        return Err(Error::InvalidParameter(format!(
            "density chart {:?} does not match field chart {:?}",
            density.chart, field.chart
        )));
    }
    if !(fd_step > 0.0) {
        return Err(Error::InvalidParameter(format!("fd_step must be positive, got {fd_step}")));
    }
    let value = central_divergence(field, density, y, fd_step)?;
    let halved = central_divergence(field, density, y, 0.5 * fd_step)?;
    let scale = field.eval(y)?.amax() * density.eval(y)?.abs();
    let roundoff = 1e-15 * scale * (y.len() as f64) / fd_step;
    let warning = if (value - halved).abs() > 10.0 * roundoff + 0.5 * value.abs().max(1e-9) {
        Some(format!(
            "step halving changed the estimate from {value:e} to {halved:e}; fd_step {fd_step:e} may be too small or too large"
        ))
    } else {
        None
    };
    Ok(DivergenceEstimate { value, halved, fd_step, warning })
}

/// Free Euler top in `ω` coordinates.
pub fn euler_top_chart(inertia: &InertiaOperator) -> ChartField {
    let n = inertia.dim();
    let inertia = inertia.clone();
    ChartField::new(DensityChart::EulerTop, bivector_dim(n), move |y| {
        let w = SkewMatrix::from_coord_vector(n, y)?;
        inertia.solve_coords(&inertia.apply(&w)?.bracket(&w).coords())
    })
}

/// LR system on `(m, α_1, …, α_k)`: `ṁ = [m, ω] + Σ λ_i α_i`, `α̇_i = [α_i, ω]`.
pub fn lr_chart(inertia: &InertiaOperator, k: usize) -> ChartField {
    let n = inertia.dim();
    let nb = bivector_dim(n);
    let inertia = inertia.clone();
    ChartField::new(DensityChart::Lr, nb * (1 + k), move |y| {
        let m = SkewMatrix::from_coord_vector(n, &y.rows(0, nb).into_owned())?;
        let w = inertia.solve(&m)?;
        let force = m.bracket(&w).coords();
        let alphas = DMatrix::from_fn(nb, k, |r, c| y[nb * (1 + c) + r]);
        let sol = solve_multipliers(inertia.factor()?, &force, &pure_rows(&alphas), &[], None)?;
        let mut out = DVector::zeros(nb * (1 + k));
        out.rows_mut(0, nb).copy_from(&(force + sol.reaction));
        for c in 0..k {
            let a = SkewMatrix::from_coord_vector(n, &alphas.column(c).into_owned())?;
            out.rows_mut(nb * (1 + c), nb).copy_from(&a.bracket(&w).coords());
        }
        Ok(out)
    })
}

/// `√det(⟨I⁻¹α_i, α_j⟩)` in the LR chart.
pub fn lr_density(inertia: &InertiaOperator, k: usize) -> MeasureDensity {
    let nb = bivector_dim(inertia.dim());
    let inertia = inertia.clone();
    MeasureDensity::new(DensityChart::Lr, "sqrt det <I^-1 alpha_i, alpha_j>", move |y| {
        let alphas = DMatrix::from_fn(nb, k, |r, c| y[nb * (1 + c) + r]);
        let inv = inertia.factor()?.solve(&alphas);
        Ok((alphas.transpose() * inv).determinant().max(0.0).sqrt())
    })
}

/// Upper-triangular coordinates `Π_ij`, `i ≤ j`, of a symmetric matrix.
pub fn sym_to_coords(p: &DMatrix<f64>) -> DVector<f64> {
    let nb = p.nrows();
    let mut out = Vec::with_capacity(nb * (nb + 1) / 2);
    for i in 0..nb {
        for j in i..nb {
            out.push(p[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

pub fn coords_to_sym(nb: usize, c: &[f64]) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(nb, nb);
    let mut idx = 0;
    for i in 0..nb {
        for j in i..nb {
            p[(i, j)] = c[idx];
            p[(j, i)] = c[idx];
            idx += 1;
        }
    }
    p
}

/// L+R system on `(ω, Π)`: `d/dt(𝓑ω) = [𝓑ω, ω]`, `Π̇ = Π ad_ω + ad_ωᵀ Π`.
pub fn lplusr_chart(inertia: &InertiaOperator) -> ChartField {
    let n = inertia.dim();
    let nb = bivector_dim(n);
    let sys = LplusRSystem::new(inertia.clone(), InertiaOperator::identity(n), LplusRMode::Nonholonomic)
        .expect("identity Π⁰ is admissible");
    ChartField::new(DensityChart::LplusR, nb + nb * (nb + 1) / 2, move |y| {
        let w = SkewMatrix::from_coord_vector(n, &y.rows(0, nb).into_owned())?;
        let pi = coords_to_sym(nb, &y.as_slice()[nb..]);
        let acc = sys.accel_with_pi(&pi, &w)?;
        let ad = ad_matrix(&w);
        let pidot = &pi * &ad + ad.transpose() * &pi;
        let mut out = DVector::zeros(y.len());
        out.rows_mut(0, nb).copy_from(&acc);
        out.rows_mut(nb, y.len() - nb).copy_from(&sym_to_coords(&pidot));
        Ok(out)
    })
}

/// `√det(I + Π)` in the L+R chart.
pub fn lplusr_density(inertia: &InertiaOperator) -> MeasureDensity {
    let nb = bivector_dim(inertia.dim());
    let i = inertia.matrix().clone();
    MeasureDensity::new(DensityChart::LplusR, "sqrt det(I + Pi)", move |y| {
        let b = &i + coords_to_sym(nb, &y.as_slice()[nb..]);
        let det = b.determinant();
        if !(det > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: crate::operators::min_eigenvalue(&b) });
        }
        Ok(det.sqrt())
    })
}

/// The reduced Chaplygin field on `(γ, p) ∈ ℝ²ⁿ`.
pub fn cotangent_chart(sys: &CotangentSystem) -> ChartField {
    let sys = sys.clone();
    let n = sys.n();
    ChartField::new(DensityChart::Cotangent, 2 * n, move |y| Ok(sys.eval(&PhasePoint::flat_only(y.clone()))?.flat))
}

/// `1/√det((I + mρ²)|_{ℝⁿ∧γ})`, evaluated at `γ/|γ|`.
pub fn chaplygin_density(sys: &CotangentSystem) -> MeasureDensity {
    let total = sys.total().clone();
    let n = sys.n();
    MeasureDensity::new(DensityChart::Cotangent, "1/sqrt det(J|h^gamma)", move |y| {
        let u = UnitVector::normalized(y.rows(0, n).into_owned())?;
        let det = total.restricted_det(&SubspaceBasis::wedge_with(&u))?;
        Ok(1.0 / det.sqrt())
    })
}

/// `(Aγ, γ)^{-(n-2)/2}`.
pub fn special_density(a: &[f64]) -> MeasureDensity {
    let a = DVector::from_column_slice(a);
    let n = a.len();
    MeasureDensity::new(DensityChart::Cotangent, "(A gamma, gamma)^(-(n-2)/2)", move |y| {
        let gamma = y.rows(0, n).into_owned();
        let s = a.component_mul(&gamma).dot(&gamma) / gamma.norm_squared();
        Ok(s.powf(-(n as f64 - 2.0) / 2.0))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityPair {
    /// `1/√det((I + mρ²)|_{ℝⁿ∧γ})`.
    pub general: f64,
    /// `(Aγ, γ)^{-(n-2)/2}` when the inertia is special.
    pub special: Option<f64>,
}

pub fn chaplygin_measure_check(sys: &CotangentSystem, gamma: &DVector<f64>) -> Result<DensityPair> {
    let y = {
        let mut y = DVector::zeros(2 * sys.n());
        y.rows_mut(0, sys.n()).copy_from(gamma);
        y
    };
    let general = chaplygin_density(sys).eval(&y)?;
    let special = match sys.inertia().special_params() {
        Some((a, _)) => Some(special_density(a.as_slice()).eval(&y)?),
        None => None,
    };
    Ok(DensityPair { general, special })
}

/// Least-squares slope of `log μ` against `log (Aγ, γ)` over the given points.
pub fn density_exponent_fit(sys: &CotangentSystem, gammas: &[DVector<f64>]) -> Result<f64> {
    let (a, _) = sys
        .inertia()
        .special_params()
        .ok_or_else(|| Error::InvalidParameter("exponent fit needs special inertia".into()))?;
    let density = chaplygin_density(sys);
    let mut xs = Vec::with_capacity(gammas.len());
    let mut ys = Vec::with_capacity(gammas.len());
    for gamma in gammas {
        let u = gamma / gamma.norm();
        let mut y = DVector::zeros(2 * sys.n());
        y.rows_mut(0, sys.n()).copy_from(&u);
        xs.push(a.component_mul(&u).dot(&u).ln());
        ys.push(density.eval(&y)?.ln());
    }
    Ok(linear_fit(&xs, &ys).0)
}

/// `(slope, intercept)` of the least-squares line.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
