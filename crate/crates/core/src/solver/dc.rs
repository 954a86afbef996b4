use log::warn;

use super::mna::MnaSystem;
use super::{OperatingPoint, SolverConfig, SolverError};
use crate::netlist::{dc_isolated_nodes, Diagnostic, DiagnosticKind, FlatCircuit};

/// gmin stepping starts this many decades above the configured gmin.
const GMIN_DECADES: i32 = 6;

/// DC operating point at t = 0 by Newton-Raphson from an all-zero guess,
/// falling back to gmin stepping when the direct solve fails.
pub fn dc_operating_point(
    circuit: &FlatCircuit,
    cfg: &SolverConfig,
) -> Result<OperatingPoint, SolverError> {
    let sys = MnaSystem::new(circuit);
    let x = solve_dc(&sys, cfg, 0.0)?;
    let mut op = sys.operating_point(&x);
    op.warnings = weak_nodes(circuit);
    for w in &op.warnings {
        warn!("{w}");
    }
    Ok(op)
}

pub(crate) fn solve_dc(
    sys: &MnaSystem,
    cfg: &SolverConfig,
    t: f64,
) -> Result<Vec<f64>, SolverError> {
    let zero = vec![0.0; sys.size()];
    match sys.newton(&zero, t, None, cfg.gmin, cfg) {
        Ok((x, _)) => Ok(x),
        Err(_) => {
            let mut x = zero;
            let mut last = None;
            for decade in (0..=GMIN_DECADES).rev() {
                let gmin = cfg.gmin * 10f64.powi(decade);
                match sys.newton(&x, t, None, gmin, cfg) {
                    Ok((next, _)) => {
                        x = next;
                        last = None;
                    }
                    Err(f) => last = Some(f),
                }
            }
            match last {
                None => Ok(x),
                Some(f) => Err(SolverError::DcNonConvergence {
                    node: sys.node_names[f.worst_node].clone(),
                    delta: f.delta,
                }),
            }
        }
    }
}

fn weak_nodes(circuit: &FlatCircuit) -> Vec<Diagnostic> {
    dc_isolated_nodes(circuit)
        .into_iter()
        .map(|n| {
            let name = circuit.node_names[n].clone();
            Diagnostic {
                kind: DiagnosticKind::FloatingNode,
                message: format!("weakly connected node `{name}`: held only by gmin"),
                subject: name,
            }
        })
        .collect()
}
