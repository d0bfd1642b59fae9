//! Coupled continuous/hybridizable discontinuous Galerkin solver for 2D
//! Poisson and linear elasticity on triangle meshes.

// Index loops mirror the matrix notation; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cg;
pub mod driver;
pub mod error;
mod exec;
pub mod hdg;
pub mod linsys;
pub mod mesh;
pub mod physics;
pub mod problems;
pub mod ref_elem;
pub mod study;
pub mod voigt;

pub use error::{Error, Result};
