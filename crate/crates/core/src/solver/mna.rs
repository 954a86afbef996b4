use nalgebra::{DMatrix, DVector};

use super::{OperatingPoint, SolverConfig};
use crate::devices::{mos_caps, mos_eval, mtj_resistance, MosParams, Waveform};
use crate::netlist::{DeviceKind, FlatCircuit};

/// Largest node-voltage change accepted in one Newton iteration.
const MAX_VOLTAGE_STEP: f64 = 0.5;

#[derive(Debug, Clone)]
struct MosStamp {
    d: usize,
    g: usize,
    s: usize,
    params: MosParams,
}

#[derive(Debug, Clone)]
pub(crate) struct SourceStamp {
    pub name: String,
    p: usize,
    n: usize,
    wave: Waveform,
}

/// Circuit compiled into index form for repeated stamping.
#[derive(Debug, Clone)]
pub struct MnaSystem {
    pub(crate) node_names: Vec<String>,
    voltage_unknowns: usize,
    conductances: Vec<(usize, usize, f64)>,
    capacitors: Vec<(usize, usize, f64)>,
    mosfets: Vec<MosStamp>,
    pub(crate) sources: Vec<SourceStamp>,
}

/// Outcome of a failed Newton solve: the node with the largest last update.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonFailure {
    pub worst_node: usize,
    pub delta: f64,
}

impl MnaSystem {
    pub fn new(circuit: &FlatCircuit) -> Self {
        let mut sys = Self {
            node_names: circuit.node_names.clone(),
            voltage_unknowns: circuit.node_count().saturating_sub(1),
            conductances: Vec::new(),
            capacitors: Vec::new(),
            mosfets: Vec::new(),
            sources: Vec::new(),
        };
        for dev in &circuit.devices {
            match &dev.kind {
                DeviceKind::Resistor { a, b, ohms } => sys.conductances.push((*a, *b, 1.0 / ohms)),
                DeviceKind::Mtj {
                    a,
                    b,
                    params,
                    state,
                    tox,
                } => sys
                    .conductances
                    .push((*a, *b, 1.0 / mtj_resistance(params, *state, *tox))),
                DeviceKind::Capacitor { a, b, farads } => sys.capacitors.push((*a, *b, *farads)),
                DeviceKind::Mosfet {
                    d, g, s, params, ..
                } => {
                    let (cgd, cgs) = mos_caps(params);
                    if cgd > 0.0 {
                        sys.capacitors.push((*g, *d, cgd));
                    }
                    if cgs > 0.0 {
                        sys.capacitors.push((*g, *s, cgs));
                    }
                    sys.mosfets.push(MosStamp {
                        d: *d,
                        g: *g,
                        s: *s,
                        params: params.clone(),
                    });
                }
                DeviceKind::Vsource { p, n, wave } => sys.sources.push(SourceStamp {
                    name: dev.name.clone(),
                    p: *p,
                    n: *n,
                    wave: wave.clone(),
                }),
            }
        }
        sys
    }

    pub fn size(&self) -> usize {
        self.voltage_unknowns + self.sources.len()
    }

    pub fn is_linear(&self) -> bool {
        self.mosfets.is_empty()
    }

    pub(crate) fn voltage(x: &[f64], node: usize) -> f64 {
        if node == 0 {
            0.0
        } else {
            x[node - 1]
        }
    }

    fn row(node: usize) -> Option<usize> {
        node.checked_sub(1)
    }

    fn add_conductance(a_mat: &mut DMatrix<f64>, a: usize, b: usize, g: f64) {
        let (ra, rb) = (Self::row(a), Self::row(b));
        if let Some(i) = ra {
            a_mat[(i, i)] += g;
        }
        if let Some(j) = rb {
            a_mat[(j, j)] += g;
        }
        if let (Some(i), Some(j)) = (ra, rb) {
            a_mat[(i, j)] -= g;
            a_mat[(j, i)] -= g;
        }
    }

    /// Current `i` flowing from node `a` to node `b` through an element.
    fn add_current(rhs: &mut DVector<f64>, a: usize, b: usize, i: f64) {
        if let Some(r) = Self::row(a) {
            rhs[r] -= i;
        }
        if let Some(r) = Self::row(b) {
            rhs[r] += i;
        }
    }

    /// Linearized system at guess `x`. With `companion = Some((dt, x_prev))`
    /// capacitors use the backward-Euler companion model, otherwise they are open.
    pub fn stamp(
        &self,
        x: &[f64],
        t: f64,
        companion: Option<(f64, &[f64])>,
        gmin: f64,
        a: &mut DMatrix<f64>,
        rhs: &mut DVector<f64>,
    ) {
        a.fill(0.0);
        rhs.fill(0.0);
        for i in 0..self.voltage_unknowns {
            a[(i, i)] += gmin;
        }
        for &(na, nb, g) in &self.conductances {
            Self::add_conductance(a, na, nb, g);
        }
        if let Some((dt, prev)) = companion {
            for &(na, nb, c) in &self.capacitors {
                let geq = c / dt;
                let v_prev = Self::voltage(prev, na) - Self::voltage(prev, nb);
                Self::add_conductance(a, na, nb, geq);
                // history source drives current from b to a
                Self::add_current(rhs, na, nb, -geq * v_prev);
            }
        }
        for m in &self.mosfets {
            let vd = Self::voltage(x, m.d);
            let vg = Self::voltage(x, m.g);
            let vs = Self::voltage(x, m.s);
            let (vgs, vds) = (vg - vs, vd - vs);
            let e = mos_eval(&m.params, vgs, vds);
            let ieq = e.ids - e.gm * vgs - e.gds * vds;
            // keeps nodes behind a cut-off channel defined
            Self::add_conductance(a, m.d, m.s, gmin);
            let (rd, rg, rs) = (Self::row(m.d), Self::row(m.g), Self::row(m.s));
            if let Some(i) = rd {
                a[(i, i)] += e.gds;
                if let Some(j) = rg {
                    a[(i, j)] += e.gm;
                }
                if let Some(j) = rs {
                    a[(i, j)] -= e.gm + e.gds;
                }
            }
            if let Some(i) = rs {
                a[(i, i)] += e.gm + e.gds;
                if let Some(j) = rg {
                    a[(i, j)] -= e.gm;
                }
                if let Some(j) = rd {
                    a[(i, j)] -= e.gds;
                }
            }
            Self::add_current(rhs, m.d, m.s, ieq);
        }
        for (k, src) in self.sources.iter().enumerate() {
            let row = self.voltage_unknowns + k;
            if let Some(i) = Self::row(src.p) {
                a[(i, row)] += 1.0;
                a[(row, i)] += 1.0;
            }
            if let Some(i) = Self::row(src.n) {
                a[(i, row)] -= 1.0;
                a[(row, i)] -= 1.0;
            }
            rhs[row] = src.wave.value_at(t);
        }
    }

    /// Newton-Raphson from `x0`. On success returns the solution and the
    /// number of iterations.
    pub(crate) fn newton(
        &self,
        x0: &[f64],
        t: f64,
        companion: Option<(f64, &[f64])>,
        gmin: f64,
        cfg: &SolverConfig,
    ) -> Result<(Vec<f64>, usize), NewtonFailure> {
        let n = self.size();
        let mut a = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        let mut x = x0.to_vec();
        let mut failure = NewtonFailure {
            worst_node: 0,
            delta: f64::INFINITY,
        };
        let iters = if self.is_linear() {
            1
        } else {
            cfg.max_newton_iters
        };
        for iter in 1..=iters {
            self.stamp(&x, t, companion, gmin, &mut a, &mut rhs);
            let Some(solution) = a.clone().lu().solve(&rhs) else {
                return Err(failure);
            };
            if solution.iter().any(|v| !v.is_finite()) {
                return Err(failure);
            }
            if self.is_linear() {
                return Ok((solution.as_slice().to_vec(), 1));
            }
            let mut converged = true;
            let mut worst = (0usize, 0.0f64);
            let mut scale = 1.0f64;
            for i in 0..self.voltage_unknowns {
                let step = (solution[i] - x[i]).abs();
                if step > MAX_VOLTAGE_STEP {
                    scale = scale.min(MAX_VOLTAGE_STEP / step);
                }
            }
            for i in 0..n {
                let old = x[i];
                let new = old + scale * (solution[i] - old);
                let delta = (new - old).abs();
                let (abstol, is_voltage) = if i < self.voltage_unknowns {
                    (cfg.abstol_v, true)
                } else {
                    (cfg.abstol_i, false)
                };
                if delta > abstol + cfg.reltol * new.abs().max(old.abs()) {
                    converged = false;
                }
                if is_voltage && delta > worst.1 {
                    worst = (i + 1, delta);
                }
                x[i] = new;
            }
            failure = NewtonFailure {
                worst_node: worst.0,
                delta: worst.1,
            };
            if converged && scale == 1.0 {
                return Ok((x, iter));
            }
        }
        Err(failure)
    }

    /// Splits a solution vector into an [`OperatingPoint`].
    pub(crate) fn operating_point(&self, x: &[f64]) -> OperatingPoint {
        let mut node_voltages = Vec::with_capacity(self.voltage_unknowns + 1);
        node_voltages.push(0.0);
        node_voltages.extend_from_slice(&x[..self.voltage_unknowns]);
        let source_currents = self
            .sources
            .iter()
            .enumerate()
            .map(|(k, s)| (s.name.clone(), -x[self.voltage_unknowns + k]))
            .collect();
        OperatingPoint {
            node_voltages,
            source_currents,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn unknowns_of(&self, op: &OperatingPoint) -> Vec<f64> {
        let mut x = op.node_voltages[1..].to_vec();
        x.extend(op.source_currents.iter().map(|(_, i)| -i));
        x
    }
}

/// Assembles the linearized MNA system of `circuit` around `guess` at time `t`.
///
/// Returns `(matrix, rhs)`. When `prev` is given together with `dt`, capacitors
/// are replaced by their backward-Euler companions (conductance `C/dt` and
/// history current `C/dt · v_prev`); otherwise they are open circuits.
pub fn stamp_system(
    circuit: &FlatCircuit,
    guess: &OperatingPoint,
    t: f64,
    dt: f64,
    prev: Option<&OperatingPoint>,
    gmin: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let sys = MnaSystem::new(circuit);
    let n = sys.size();
    let mut a = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let x = sys.unknowns_of(guess);
    let prev_x = prev.map(|p| sys.unknowns_of(p));
    sys.stamp(
        &x,
        t,
        prev_x.as_deref().map(|p| (dt, p)),
        gmin,
        &mut a,
        &mut rhs,
    );
    (a, rhs)
}
