//! Principal curves of uniform distributions.
//!
//! A curve is principal when every point is the mean of the mass that
//! projects onto it. This crate integrates the curvature dynamics that such
//! curves satisfy, evaluates the transverse moments of normal-plane slices,
//! and checks candidate curves by Monte-Carlo Voronoi barycenters.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod frame;
pub mod helix;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod validate;

pub use error::{Error, Result};
pub use exec::Execution;
