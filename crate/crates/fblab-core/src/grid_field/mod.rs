//! Uniform node-centered grids on `[-L, L]^n` (n = 1 or 2) together with
//! scalar/vector/matrix node fields, partial-cell region masks, finite
//! difference calculus and masked quadrature.

mod calculus;
mod domain;
mod field;
mod mask;
mod quadrature;

pub use calculus::{gradient, hessian, positive_side_gradient};
pub use domain::{make_grid, GridDomain, Point};
pub use field::{sample, MatrixField, ScalarField, VectorField};
pub use mask::RegionMask;
pub use quadrature::{integrate, integrate_fn, sphere_integral, sphere_integral_fn};
