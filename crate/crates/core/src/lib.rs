//! Frequency combs from nuclear forward scattering with switched hyperfine
//! fields.
//!
//! A pulse excites two hyperfine lines of a 57Fe-like absorber. Rotating or
//! switching off the magnetic field freezes or reverses the quantum beat, so
//! the scattered field becomes a train of sine lobes whose spectrum is a comb.
//!
//! * [`physics`] parameters and beat quantities
//! * [`switching`] field switching sequences
//! * [`mbe`] Maxwell-Bloch propagation through the sample
//! * [`analytic`] first-order closed-form model
//! * [`spectrum`] windowed transforms, peak finding, comb metrics
//! * [`runner`] configured runs and the command line front end

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod error;
pub mod io;
pub mod mbe;
pub mod physics;
pub mod quadrature;
pub mod record;
pub mod runner;
pub mod spectrum;
pub mod switching;

pub use config::RunConfig;
pub use error::{Error, Result};
