//! Spectral hull machinery on arbitrary polygons.
//!
//! The crate builds interpolation and quadrature data directly on convex or
//! concave polygonal hulls (no sub-triangulation of the element), and uses it
//! in discontinuous Galerkin and discontinuous least-squares solvers for
//! two-dimensional linear conservation laws.
//!
//! Pipeline overview:
//! - [`geometry`] and [`partition`]: polygons, predicates, triangulation,
//!   convex partitioning and the normalization map.
//! - [`candidates`]: dense interior point clouds.
//! - [`monomials`] and [`moments`]: monomial spaces, Vandermonde matrices and
//!   exact moments via a boundary reduction.
//! - [`fekete`]: SVD preconditioning and greedy selection of approximate
//!   Fekete points with quadrature weights.
//! - [`basis`]: nodal, modal and orthonormal hull bases, generalized Fourier
//!   coefficients, Lebesgue bounds and tabulation.
//! - [`quadrature`]: Gauss-Legendre rules on edges, triangles and polygons.
//! - [`solver`]: DG and DLS discretizations of linear acoustics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod candidates;
mod error;
pub mod fekete;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod monomials;
pub mod partition;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{AffineMap, Point, Polygon};
pub use monomials::{MonomialSpec, Space};
