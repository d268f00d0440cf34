//! Casimir–Polder dispersion potentials of a ground-state atom near a planar
//! dielectric half-space, including the quadrupole channel and the
//! trace part of the octupole moment that couples like an effective dipole
//! once retardation matters.
//!
//! Internal units are natural units with ħ = c = ε₀ = 1 and the Bohr radius
//! as the length unit; see [`units`] for conversions.

// Index loops mirror tensor notation; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod dataio;
pub mod error;
pub mod halfspace_green;
pub mod potentials;
pub mod quadrature;
pub mod response;
pub mod tensors;
pub mod units;

pub use error::{Error, Result};
