//! Camera pose loci from a single ellipse-ellipsoid correspondence.
// negated comparisons are deliberate: NaN must fail every guard
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod cone;
pub mod conic;
pub mod cubic;
pub mod decoupled;
pub mod error;
pub mod geometry;
pub mod intersect;
pub mod solver;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
