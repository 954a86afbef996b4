//! Transient circuit simulation of STT-MRAM read paths.
//!
//! The crate is organized bottom-up:
//!
//! - [`netlist`]: a small SPICE dialect, hierarchy flattening and connectivity checks.
//! - [`devices`]: square-law MOSFET, tunnel-junction resistance, PWL sources.
//! - [`solver`]: modified nodal analysis, Newton DC operating point, backward-Euler transient.
//! - [`senseamps`]: generators for the current-mode, voltage-mode and neutralized
//!   voltage-mode sense amplifiers and their read timing.
//! - [`variation`]: seeded process-variation draws and Monte Carlo ensembles.
//! - [`metrics`]: decision, readout delay, power, sense margin and read disturbance.

// `!(x > 0.0)` is used on purpose throughout validation so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod devices;
pub mod error;
pub mod metrics;
pub mod netlist;
pub mod senseamps;
pub mod solver;
pub mod variation;

pub use error::{Error, Result};
