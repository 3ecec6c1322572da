//! Numerical laboratory for the one-phase Bernoulli problem and small-angle
//! capillary graph minimizers on uniform square grids.
//!
//! The crate is organized around five building blocks:
//!
//! * [`grid_field`]: grids, node fields, masked quadrature, finite differences;
//! * [`functionals`]: the Alt-Caffarelli and capillary energies plus their
//!   smoothed variants with exact discrete gradients;
//! * [`solvers`]: projected gradient descent with backtracking and
//!   delta-continuation, free boundary extraction, Hausdorff distances;
//! * [`monotone`]: density ratios of the signed interface/wetting measure,
//!   Weiss energies, cutoff-regularized variants, monotonicity audits;
//! * [`exact`]: closed-form half-plane fields and curvature diagnostics.
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! results. All computations are single-threaded.

pub mod error;
pub mod exact;
pub mod functionals;
pub mod grid_field;
pub mod monotone;
pub mod solvers;

pub use error::{Error, Result};
