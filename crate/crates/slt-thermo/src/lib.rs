//! Tempered Gibbs posterior sampling and thermodynamic diagnostics for
//! singular Bayesian models.
//!
//! The crate is organized as a pipeline: [`model`] defines six small models
//! with known non-identifiability structure, [`sampler`] draws from their
//! tempered (optionally tilted) posteriors with HMC or random-walk
//! Metropolis, [`thermo`] turns retained draws into fluctuation,
//! susceptibility and entropy diagnostics, and [`scan`] orchestrates the
//! temperature, sample-size, field-response and landscape sweeps built on
//! top of them.

pub mod error;
pub mod math;
pub mod matrix;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod scan;
pub mod stats;
pub mod thermo;

pub use error::{Error, Result};
