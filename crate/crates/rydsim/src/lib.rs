//! Numerical models for nonlinear and quantum optics in Rydberg-EIT media.
//!
//! Units throughout are μm, μs and rad·μs⁻¹. Dimensionless two-photon and
//! device models work in units of the blockade radius `z_b`.

pub mod devices;
pub mod ensemble;
mod error;
pub mod linear;
pub mod nlse;
pub mod params;
pub mod quad;
pub mod two_photon;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{derive_scales, polariton_mixing, DerivedScales, MediumParams};
