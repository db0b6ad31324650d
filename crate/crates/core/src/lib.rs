//! Rigid-body systems on `SO(n)` with left-invariant metrics and right-invariant
//! nonholonomic constraints: vector fields, integrators and numerical diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod batch;
pub mod diagnostics;
pub mod error;
pub mod integrators;
pub mod liecore;
pub mod operators;
pub mod phase;
pub mod sampling;
pub mod scenarios;
pub mod systems;

pub use error::{Error, Result};
