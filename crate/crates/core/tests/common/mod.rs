#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use lrmech::integrators::{step_raw, Method};
use lrmech::liecore::SkewMatrix;
use lrmech::phase::{PhasePoint, System};

/// Time derivative of `f` along the flow of `sys` at `x`: central differences over
/// unprojected RK4 steps of `±h` and `±h/2`, Richardson-combined.
pub fn flow_derivative<S, F>(sys: &S, x: &PhasePoint, f: F) -> DVector<f64>
where
    S: System + ?Sized,
    F: Fn(&PhasePoint) -> DVector<f64>,
{
    let h = 1e-3;
    let central = |h: f64| {
        let xp = step_raw(sys, x, h, Method::LieRk4).unwrap();
        let xm = step_raw(sys, x, -h, Method::LieRk4).unwrap();
        (f(&xp) - f(&xm)) / (2.0 * h)
    };
    let d1 = central(h);
    let d2 = central(0.5 * h);
    (d2 * 4.0 - d1) / 3.0
}

pub fn scalar(v: f64) -> DVector<f64> {
    DVector::from_element(1, v)
}

/// `-½ tr(XY)` straight from the matrices.
pub fn trace_inner(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    -0.5 * (x * y).trace()
}

/// Body velocity `ω` in the leading flat block.
pub fn omega_of(x: &PhasePoint, n: usize) -> SkewMatrix {
    let nb = n * (n - 1) / 2;
    SkewMatrix::from_coord_vector(n, &x.flat.rows(0, nb).into_owned()).unwrap()
}
