//! Simulation and analysis of discrete time-crystalline order in driven,
//! disordered, dipolar-interacting spin ensembles.
//!
//! * [`disorder`] samples spin positions, dipolar couplings and on-site fields.
//! * [`hilbert`] is a dense exact engine for spin-1/2 and spin-1 ensembles.
//! * [`floquet`] runs the ℤ₂ and ℤ₃ drive protocols and records polarization traces.
//! * [`meanfield`] solves the single-spin self-consistency for 2T-periodic orbits
//!   and averages it over disorder to predict the phase boundary.
//! * [`analysis`] holds spectra, crystalline fractions, lifetimes and boundary fits.
//! * [`sweep`] drives parameter sweeps from unit-annotated config files.

pub mod analysis;
pub mod disorder;
pub mod error;
pub mod floquet;
pub mod hilbert;
pub mod meanfield;
pub mod rng;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
