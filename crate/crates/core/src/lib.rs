//! Simulation library for a dissipative spin-star model: a central spin-1/2
//! under continuous measurement, coupled to `N` collective ancilla spins.
//!
//! The crate builds the full Lindblad generator and its spectrum, derives the
//! effective ancilla master equation in the strong-measurement regime (with
//! an independent projection-based cross-check), integrates full, effective,
//! and mean-field dynamics, and maps out the stationary/oscillating phase
//! diagram.

pub mod dynamics;
pub mod error;
pub mod export;
pub mod linalg;
pub mod liouville;
pub mod meanfield;
pub mod ode;
pub mod operators;
pub mod params;
pub mod phase;
pub mod signal;
pub mod zeno;

pub use error::{Error, Result};
pub use params::SpinStarParams;
