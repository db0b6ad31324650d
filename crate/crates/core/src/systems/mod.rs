//! Vector fields of the rigid-body systems.
//!
//! All group factors are left-trivialized (`ġ = g ω`). Right-invariant
//! constraints are stored in the space frame and pulled to the body frame with
//! `Ad_{g⁻¹}` at every evaluation.

pub mod chaplygin;
pub mod classical;
pub mod cotangent;
pub mod coupled;
pub mod gsr;
pub mod lplusr;
pub mod lr;
pub mod lstar;
pub mod multipliers;
pub mod ncoupled;
pub mod support;
pub mod trace;

use nalgebra::{DMatrix, DVector};

pub use chaplygin::RubberChaplyginSystem;
pub use classical::{iso3, iso3_inverse, ClassicalChaplyginSystem, ClassicalRubberSystem};
pub use cotangent::CotangentSystem;
pub use coupled::{CoupledParams, CoupledReducedSystem, CoupledSystem};
pub use gsr::GsrSystem;
pub use lplusr::{LplusRMode, LplusRSystem};
pub use lr::LrSystem;
pub use lstar::LStarSystem;
pub use ncoupled::{NCoupledBody, NCoupledSystem};
pub use support::SupportSystem;

use crate::error::{check_dim, Error, Result};
use crate::liecore::{bivector_dim, SkewMatrix};
use crate::phase::PhasePoint;

pub(crate) fn skew_at(n: usize, flat: &DVector<f64>, offset: usize) -> SkewMatrix {
    let nb = bivector_dim(n);
    SkewMatrix::from_coords(n, &flat.as_slice()[offset..offset + nb]).expect("slice has bivector length")
}

pub(crate) fn vec_at(flat: &DVector<f64>, offset: usize, len: usize) -> DVector<f64> {
    flat.rows(offset, len).into_owned()
}

/// The single group factor of a one-body state.
pub(crate) fn the_group(x: &PhasePoint, n: usize) -> Result<&DMatrix<f64>> {
    let g = x.groups.first().ok_or_else(|| Error::InvalidParameter("state has no group factor".into()))?;
    check_dim(n, g.nrows())?;
    Ok(g)
}

pub(crate) fn check_flat(x: &PhasePoint, len: usize) -> Result<()> {
    check_dim(len, x.flat.len())
}

/// Skew matrix `ωX + Xω` for symmetric `X`.
pub(crate) fn anticommutator(omega: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    omega * x + x * omega
}

/// Nonzero, finite parameter check.
pub(crate) fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}
