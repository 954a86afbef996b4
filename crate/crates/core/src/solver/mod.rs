//! Modified nodal analysis with Newton-Raphson DC and backward-Euler transient.
//!
//! The unknown vector holds the non-ground node voltages followed by one
//! branch current per voltage source.

mod dc;
mod mna;
mod transient;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::Diagnostic;

pub use dc::dc_operating_point;
pub use mna::{stamp_system, MnaSystem};
pub use transient::{transient_analysis, TransientResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub abstol_v: f64,
    pub abstol_i: f64,
    pub reltol: f64,
    pub max_newton_iters: usize,
    pub gmin: f64,
    pub dt: f64,
    pub t_stop: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            abstol_v: 1e-6,
            abstol_i: 1e-12,
            reltol: 1e-4,
            max_newton_iters: 100,
            gmin: 1e-12,
            dt: 1e-12,
            t_stop: 2e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("abstol_v", self.abstol_v),
            ("abstol_i", self.abstol_i),
            ("reltol", self.reltol),
            ("gmin", self.gmin),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(SolverError::Config(format!("{name} must be positive")));
            }
        }
        if self.max_newton_iters == 0 {
            return Err(SolverError::Config(
                "max_newton_iters must be at least 1".into(),
            ));
        }
        if !(self.dt < self.t_stop) {
            return Err(SolverError::Config("dt must be smaller than t_stop".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(
        "DC operating point did not converge (worst node `{node}`, last update {delta:.3e} V)"
    )]
    DcNonConvergence { node: String, delta: f64 },
    #[error("transient step at t = {time:.4e} s did not converge after 8 step halvings")]
    TransientNonConvergence { time: f64 },
    #[error("singular MNA matrix")]
    Singular,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// Converged DC solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    /// Indexed by node; entry 0 is ground and always 0.
    pub node_voltages: Vec<f64>,
    /// Current delivered by each source out of its positive terminal, in device order.
    pub source_currents: Vec<(String, f64)>,
    /// Nodes held only by gmin (capacitively coupled or gate-only).
    pub warnings: Vec<Diagnostic>,
}

impl OperatingPoint {
    pub fn source_current(&self, name: &str) -> Option<f64> {
        self.source_currents
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, i)| *i)
    }
}
