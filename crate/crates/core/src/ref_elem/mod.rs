//! Reference simplices: nodal Lagrange bases, quadrature and affine maps.

mod basis;
mod geometry;
mod quadrature;

pub use basis::{lagrange_basis, LagrangeBasis, ReferenceElement, MAX_DEGREE};
pub use geometry::{map_physical, ElementGeometry, MappedElement, REF_VERTICES};
pub use quadrature::{gauss_legendre_01, simplex_quadrature, QuadratureRule, MAX_ORDER};
