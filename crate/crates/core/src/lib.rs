//! Transient and stationary radiative heat flux between two small particles.
//!
//! Particle 1 starts radiating at `t = 0`; all transient observables are
//! functions of the retarded time `tau = t - d/c` and split the total flux
//! into a non-dissipative energy change and the dissipative heat transfer.
//! Both particles are point dipoles with Drude–Lorentz permittivity and sit
//! in vacuum. All values are SI; fluxes are normalized per `V1 * V2` unless
//! stated otherwise.

// Negated comparisons reject NaN; quadrature tables keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod greens;
pub mod materials;
pub mod quadrature;
pub mod series;
pub mod stationary;
pub mod transient;
pub mod validation;

pub use error::{Error, Result};
