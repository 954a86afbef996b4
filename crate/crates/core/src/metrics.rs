//! Figures of merit extracted from a read transient.
//!
//! Polarity convention: an antiparallel data cell leaves SAOUT above SAOUTB at
//! the end of the word-line pulse, a parallel cell leaves it below.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::devices::{mtj_resistance, MtjState};
use crate::netlist::{DeviceKind, FlatCircuit};
use crate::senseamps::{
    TimingPlan, DATA_MTJ, NODE_BL, NODE_GC, NODE_GR, NODE_REFL, NODE_SAOUT, NODE_SAOUTB,
};
use crate::solver::TransientResult;

/// Output difference below which a read is not counted as a decision.
pub const DECISION_BAND: f64 = 10e-3;
/// Read frequency used for average power.
pub const READ_FREQUENCY: f64 = 66.7e6;
/// Read current must stay below this fraction of the critical current.
pub const READ_DISTURB_LIMIT: f64 = 0.20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("node `{0}` is not in the transient result")]
    MissingNode(String),
    #[error("device `{0}` is not a tunnel junction of the circuit")]
    MissingDevice(String),
    #[error("transient ends at {end:e} s, before the decision instant {needed:e} s")]
    TooShort { end: f64, needed: f64 },
    #[error("no decision within window")]
    NoDecision,
}

/// Outcome of one read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    P,
    Ap,
    Indeterminate,
}

impl Decision {
    pub fn state(self) -> Option<MtjState> {
        match self {
            Decision::P => Some(MtjState::P),
            Decision::Ap => Some(MtjState::Ap),
            Decision::Indeterminate => None,
        }
    }

    /// Indeterminate reads are never correct.
    pub fn is_correct(self, data: MtjState) -> bool {
        self.state() == Some(data)
    }
}

impl From<MtjState> for Decision {
    fn from(s: MtjState) -> Self {
        match s {
            MtjState::P => Decision::P,
            MtjState::Ap => Decision::Ap,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::P => "P",
            Decision::Ap => "AP",
            Decision::Indeterminate => "indeterminate",
        })
    }
}

impl FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("indeterminate") {
            return Ok(Decision::Indeterminate);
        }
        s.parse::<MtjState>().map(Decision::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutMetrics {
    pub decision: Decision,
    /// SAE rise to a half-supply output split; `None` without a decision.
    pub delay: Option<f64>,
    pub power_avg: f64,
    pub sense_margin: f64,
    /// Peak current through the data junction.
    pub i_rd_peak: f64,
}

/// Terms of `P = α · C_total · V_swing · V_DD · f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub activity: f64,
    pub c_total: f64,
    pub v_swing: f64,
    pub vdd: f64,
    pub f: f64,
}

pub fn power_dynamic_model(m: &PowerModel) -> f64 {
    m.activity * m.c_total * m.v_swing * m.vdd * m.f
}

fn node<'a>(tr: &'a TransientResult, name: &str) -> Result<&'a [f64], MetricError> {
    tr.node(name)
        .ok_or_else(|| MetricError::MissingNode(name.to_string()))
}

fn output_difference(tr: &TransientResult) -> Result<Vec<f64>, MetricError> {
    let a = node(tr, NODE_SAOUT)?;
    let b = node(tr, NODE_SAOUTB)?;
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

fn covers(tr: &TransientResult, t: f64) -> Result<(), MetricError> {
    let end = tr.times.last().copied().unwrap_or(f64::NEG_INFINITY);
    // half a femtosecond of slack for accumulated grid rounding
    if end + 5e-16 < t {
        return Err(MetricError::TooShort { end, needed: t });
    }
    Ok(())
}

/// Classifies `SAOUT - SAOUTB` at the end of the word-line pulse.
pub fn extract_decision(
    tr: &TransientResult,
    timing: &TimingPlan,
) -> Result<Decision, MetricError> {
    let diff = output_difference(tr)?;
    let t = timing.decision_time();
    covers(tr, t)?;
    let d = tr.sample(&diff, t);
    Ok(if d > DECISION_BAND {
        Decision::Ap
    } else if d < -DECISION_BAND {
        Decision::P
    } else {
        Decision::Indeterminate
    })
}

/// Time from the SAE rising edge until `|SAOUT - SAOUTB|` first reaches
/// `VDD / 2` with the polarity of the final decision, interpolated linearly
/// between grid points.
pub fn extract_readout_delay(
    tr: &TransientResult,
    timing: &TimingPlan,
) -> Result<f64, MetricError> {
    let sign = match extract_decision(tr, timing)? {
        Decision::Ap => 1.0,
        Decision::P => -1.0,
        Decision::Indeterminate => return Err(MetricError::NoDecision),
    };
    let diff = output_difference(tr)?;
    let start = timing.sae_rise;
    let end = timing.decision_time();
    let half = timing.vdd / 2.0;
    let mut prev = (start, sign * tr.sample(&diff, start));
    if prev.1 >= half {
        return Ok(0.0);
    }
    let first = tr.times.partition_point(|&t| t <= start);
    for (&t, &d) in tr.times[first..].iter().zip(&diff[first..]) {
        if t > end + 5e-16 {
            break;
        }
        let s = sign * d;
        if s >= half {
            let crossing = prev.0 + (t - prev.0) * (half - prev.1) / (s - prev.1);
            return Ok(crossing - start);
        }
        prev = (t, s);
    }
    Err(MetricError::NoDecision)
}

/// Supply energy over the whole result, trapezoidal, times `f`.
pub fn extract_power_integrated(tr: &TransientResult, vdd: f64, f: f64) -> f64 {
    let i = &tr.supply_current;
    let energy: f64 = tr
        .times
        .windows(2)
        .zip(i.windows(2))
        .map(|(t, i)| 0.5 * (i[0] + i[1]) * (t[1] - t[0]))
        .sum();
    vdd * energy * f
}

/// `|V_BL - V_REFL|` when SAE1 hands the lines to the latch.
pub fn sense_margin(tr: &TransientResult, timing: &TimingPlan) -> Result<f64, MetricError> {
    let t = timing.sae1_rise;
    covers(tr, t)?;
    let bl = tr.sample(node(tr, NODE_BL)?, t);
    let refl = tr.sample(node(tr, NODE_REFL)?, t);
    Ok((bl - refl).abs())
}

/// Excursions of the clamp gates from their bias levels while the latch
/// resolves, between SAE1 rise and the end of the word-line pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDisturbance {
    /// Peak `|V_GC - VC|`.
    pub gc: f64,
    /// Peak `|V_GR - VR|`.
    pub gr: f64,
    /// Peak `|(V_GC - V_GR) - (VC - VR)|`, the error in the clamp offset
    /// that sets the branch current imbalance.
    pub differential: f64,
}

pub fn gate_disturbance(
    tr: &TransientResult,
    timing: &TimingPlan,
) -> Result<GateDisturbance, MetricError> {
    let gc = node(tr, NODE_GC)?;
    let gr = node(tr, NODE_GR)?;
    covers(tr, timing.decision_time())?;
    let mut out = GateDisturbance {
        gc: 0.0,
        gr: 0.0,
        differential: 0.0,
    };
    let window = timing.sae1_rise..=timing.decision_time();
    for (i, t) in tr.times.iter().enumerate() {
        if !window.contains(t) {
            continue;
        }
        out.gc = out.gc.max((gc[i] - timing.vc).abs());
        out.gr = out.gr.max((gr[i] - timing.vr).abs());
        out.differential = out
            .differential
            .max(((gc[i] - gr[i]) - (timing.vc - timing.vr)).abs());
    }
    Ok(out)
}

/// Peak current and critical current of one tunnel junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCurrent {
    pub name: String,
    pub i_peak: f64,
    pub i_c: f64,
}

impl CellCurrent {
    pub fn passes(&self) -> bool {
        check_read_disturbance(self.i_peak, self.i_c)
    }
}

/// Peak read current of every junction in `circuit`, in device order.
pub fn cell_currents(tr: &TransientResult, circuit: &FlatCircuit) -> Vec<CellCurrent> {
    circuit
        .devices
        .iter()
        .filter_map(|d| match &d.kind {
            DeviceKind::Mtj {
                a,
                b,
                params,
                state,
                tox,
            } => {
                let r = mtj_resistance(params, *state, *tox);
                let i_peak = tr.voltages[*a]
                    .iter()
                    .zip(&tr.voltages[*b])
                    .map(|(x, y)| ((x - y) / r).abs())
                    .fold(0.0, f64::max);
                Some(CellCurrent {
                    name: d.name.clone(),
                    i_peak,
                    i_c: params.jc0 * params.area,
                })
            }
            _ => None,
        })
        .collect()
}

/// Passes when the read current stays below 20 % of the critical current.
pub fn check_read_disturbance(i_rd_peak: f64, i_c: f64) -> bool {
    debug_assert!(i_c > 0.0);
    i_rd_peak < READ_DISTURB_LIMIT * i_c
}

/// All readout figures of one built-in design run.
pub fn extract_readout(
    tr: &TransientResult,
    circuit: &FlatCircuit,
    timing: &TimingPlan,
) -> Result<ReadoutMetrics, MetricError> {
    let decision = extract_decision(tr, timing)?;
    let delay = match extract_readout_delay(tr, timing) {
        Ok(d) => Some(d),
        Err(MetricError::NoDecision) => None,
        Err(e) => return Err(e),
    };
    let i_rd_peak = cell_currents(tr, circuit)
        .into_iter()
        .find(|c| c.name.eq_ignore_ascii_case(DATA_MTJ))
        .map(|c| c.i_peak)
        .ok_or_else(|| MetricError::MissingDevice(DATA_MTJ.to_string()))?;
    Ok(ReadoutMetrics {
        decision,
        delay,
        power_avg: extract_power_integrated(tr, timing.vdd, READ_FREQUENCY),
        sense_margin: sense_margin(tr, timing)?,
        i_rd_peak,
    })
}
