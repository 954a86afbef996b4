use std::collections::BTreeMap;

use super::dc::solve_dc;
use super::mna::MnaSystem;
use super::{SolverConfig, SolverError};
use crate::netlist::FlatCircuit;

/// Step halvings attempted before a transient step is declared failed.
const MAX_HALVINGS: u32 = 8;

/// Sampled waveforms on the fixed time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientResult {
    pub times: Vec<f64>,
    pub node_names: Vec<String>,
    /// `voltages[node][step]`; node 0 is ground.
    pub voltages: Vec<Vec<f64>>,
    pub source_names: Vec<String>,
    /// Current delivered out of each source's positive terminal, `[source][step]`.
    pub source_currents: Vec<Vec<f64>>,
    /// Current delivered by the source named `vdd`, zero if there is none.
    pub supply_current: Vec<f64>,
}

impl TransientResult {
    pub fn node(&self, name: &str) -> Option<&[f64]> {
        let name = name.to_ascii_lowercase();
        self.node_names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.voltages[i].as_slice())
    }

    pub fn source(&self, name: &str) -> Option<&[f64]> {
        self.source_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .map(|i| self.source_currents[i].as_slice())
    }

    /// Linear interpolation of a series on the time grid.
    pub fn sample(&self, series: &[f64], t: f64) -> f64 {
        let times = &self.times;
        if t <= times[0] {
            return series[0];
        }
        let last = times.len() - 1;
        if t >= times[last] {
            return series[last];
        }
        let i = times.partition_point(|&x| x <= t);
        let (t0, t1) = (times[i - 1], times[i]);
        series[i - 1] + (series[i] - series[i - 1]) * (t - t0) / (t1 - t0)
    }

    pub fn value_at(&self, node: &str, t: f64) -> Option<f64> {
        self.node(node).map(|s| self.sample(s, t))
    }
}

/// Fixed-step backward-Euler integration from the DC solution at t = 0.
///
/// Nodes named in `initial` (and grounded capacitors with `ic=`) replace the DC
/// value at t = 0 only. A step whose Newton iteration fails is retried as two
/// half steps, recursively up to eight times; outputs stay on the fixed grid.
pub fn transient_analysis(
    circuit: &FlatCircuit,
    cfg: &SolverConfig,
    initial: &BTreeMap<String, f64>,
) -> Result<TransientResult, SolverError> {
    cfg.validate()?;
    let sys = MnaSystem::new(circuit);
    let mut x = solve_dc(&sys, cfg, 0.0)?;

    for &(node, v) in &circuit.initial {
        x[node - 1] = v;
    }
    for (name, &v) in initial {
        let node = circuit
            .node_index(name)
            .ok_or_else(|| SolverError::UnknownNode(name.clone()))?;
        if node != 0 {
            x[node - 1] = v;
        }
    }

    let steps = ((cfg.t_stop / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let nodes = circuit.node_count();
    let nv = nodes - 1;
    let nsrc = sys.sources.len();
    let mut times = Vec::with_capacity(steps + 1);
    let mut voltages = vec![Vec::with_capacity(steps + 1); nodes];
    let mut currents = vec![Vec::with_capacity(steps + 1); nsrc];

    let mut record = |t: f64, x: &[f64]| {
        times.push(t);
        voltages[0].push(0.0);
        for n in 1..nodes {
            voltages[n].push(x[n - 1]);
        }
        for k in 0..nsrc {
            currents[k].push(-x[nv + k]);
        }
    };
    // the t = 0 source currents come from the DC solve, before any override
    record(0.0, &x);

    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = if k == steps {
            cfg.t_stop
        } else {
            k as f64 * cfg.dt
        };
        x = advance(&sys, cfg, &x, t, t_next - t, 0)?;
        t = t_next;
        record(t, &x);
    }

    let source_names: Vec<String> = sys.sources.iter().map(|s| s.name.clone()).collect();
    let supply_current = source_names
        .iter()
        .position(|n| n.eq_ignore_ascii_case("vdd"))
        .map(|i| currents[i].clone())
        .unwrap_or_else(|| vec![0.0; times.len()]);

    Ok(TransientResult {
        times,
        node_names: circuit.node_names.clone(),
        voltages,
        source_names,
        source_currents: currents,
        supply_current,
    })
}

fn advance(
    sys: &MnaSystem,
    cfg: &SolverConfig,
    prev: &[f64],
    t: f64,
    h: f64,
    depth: u32,
) -> Result<Vec<f64>, SolverError> {
    match sys.newton(prev, t + h, Some((h, prev)), cfg.gmin, cfg) {
        Ok((x, _)) => Ok(x),
        Err(_) if depth < MAX_HALVINGS => {
            let mid = advance(sys, cfg, prev, t, h / 2.0, depth + 1)?;
            advance(sys, cfg, &mid, t + h / 2.0, h / 2.0, depth + 1)
        }
        Err(_) => Err(SolverError::TransientNonConvergence { time: t + h }),
    }
}
