//! Process variation: seeded per-device draws, the oxide-to-resistance
//! calibration, and Monte Carlo ensembles over the built-in designs.
//!
//! Every random value is a pure function of `(seed, sample index, device
//! class, ordinal within class)`. Each key seeds its own ChaCha8 stream, so a
//! sample can be drawn without drawing the ones before it, and extra passive
//! elements in a circuit never shift the draws of its transistors or junctions.

mod ensemble;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::devices::{mtj_resistance, MtjParams, MtjState};
use crate::netlist::{DeviceKind, FlatCircuit};

pub use ensemble::{run_ensemble, run_ensemble_range, EnsembleResult, ReadBench, SampleOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariationError {
    #[error("{0} must be a non-negative finite number, got {1}")]
    NegativeSigma(&'static str, f64),
    #[error("at least one sample is required")]
    NoSamples,
    #[error("{0} must lie in {1}, got {2}")]
    OutOfRange(&'static str, &'static str, f64),
    #[error("sample index {index} is outside 0..{samples}")]
    IndexOutOfRange { index: usize, samples: usize },
    #[error("ensembles `{0}` and `{1}` cannot be merged")]
    Incompatible(String, String),
}

/// One-sigma variation levels and the sampling plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationSpec {
    /// Relative one-sigma spread of the barrier thickness.
    pub sigma_tox_rel: f64,
    /// One-sigma threshold-voltage shift of every transistor (V).
    pub sigma_vth: f64,
    pub seed: u64,
    pub samples: usize,
}

impl VariationSpec {
    /// 2 % (3σ) oxide spread and 30 mV (3σ) threshold spread.
    pub fn standard(seed: u64, samples: usize) -> Self {
        Self {
            sigma_tox_rel: 0.02 / 3.0,
            sigma_vth: 0.01,
            seed,
            samples,
        }
    }

    /// No variation at all; every sample is the nominal circuit.
    pub fn nominal(seed: u64, samples: usize) -> Self {
        Self {
            sigma_tox_rel: 0.0,
            sigma_vth: 0.0,
            seed,
            samples,
        }
    }

    pub fn validate(&self) -> Result<(), VariationError> {
        for (name, v) in [
            ("sigma_tox_rel", self.sigma_tox_rel),
            ("sigma_vth", self.sigma_vth),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(VariationError::NegativeSigma(name, v));
            }
        }
        if self.samples == 0 {
            return Err(VariationError::NoSamples);
        }
        Ok(())
    }
}

/// Barrier sensitivity that maps a relative oxide spread onto the same
/// relative spread of log-resistance, both given as 3σ values.
pub fn calibrate_beta(
    sigma_tox_rel_3s: f64,
    sigma_r_rel_3s: f64,
    tox0: f64,
) -> Result<f64, VariationError> {
    if !(sigma_tox_rel_3s > 0.0 && sigma_tox_rel_3s < 1.0) {
        return Err(VariationError::OutOfRange(
            "sigma_tox_rel_3s",
            "(0, 1)",
            sigma_tox_rel_3s,
        ));
    }
    if !(0.0..1.0).contains(&sigma_r_rel_3s) {
        return Err(VariationError::OutOfRange(
            "sigma_r_rel_3s",
            "[0, 1)",
            sigma_r_rel_3s,
        ));
    }
    if !(tox0 > 0.0 && tox0.is_finite()) {
        return Err(VariationError::OutOfRange("tox0", "(0, inf)", tox0));
    }
    Ok((sigma_r_rel_3s / 3.0) / ((sigma_tox_rel_3s / 3.0) * tox0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
enum DeviceClass {
    Mtj = 1,
    Mos = 2,
}

/// Standard normal value for one device of one sample.
fn unit_normal(seed: u64, index: usize, class: DeviceClass, ordinal: usize) -> f64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(index as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(class as u64).to_le_bytes());
    key[24..].copy_from_slice(&(ordinal as u64).to_le_bytes());
    StandardNormal.sample(&mut ChaCha8Rng::from_seed(key))
}

/// Per-device values of one Monte Carlo sample, in device order of each class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDraw {
    pub index: usize,
    /// Barrier thickness of each junction (m).
    pub tox_values: Vec<f64>,
    /// Threshold shift of each transistor (V).
    pub vth_deltas: Vec<f64>,
}

pub fn draw_sample(
    spec: &VariationSpec,
    index: usize,
    circuit: &FlatCircuit,
) -> Result<SampleDraw, VariationError> {
    if index >= spec.samples {
        return Err(VariationError::IndexOutOfRange {
            index,
            samples: spec.samples,
        });
    }
    let mut tox_values = Vec::new();
    let mut vth_deltas = Vec::new();
    for d in &circuit.devices {
        match &d.kind {
            DeviceKind::Mtj { params, .. } => {
                let k = tox_values.len();
                let z = if spec.sigma_tox_rel > 0.0 {
                    unit_normal(spec.seed, index, DeviceClass::Mtj, k)
                } else {
                    0.0
                };
                tox_values.push(params.tox0 * (1.0 + spec.sigma_tox_rel * z));
            }
            DeviceKind::Mosfet { .. } => {
                let k = vth_deltas.len();
                let z = if spec.sigma_vth > 0.0 {
                    unit_normal(spec.seed, index, DeviceClass::Mos, k)
                } else {
                    0.0
                };
                vth_deltas.push(spec.sigma_vth * z);
            }
            _ => {}
        }
    }
    Ok(SampleDraw {
        index,
        tox_values,
        vth_deltas,
    })
}

/// Returns `circuit` with the draw's oxide thicknesses and threshold shifts.
///
/// # Panics
/// If the draw was made for a circuit with different device counts.
pub fn apply_draw(circuit: &FlatCircuit, draw: &SampleDraw) -> FlatCircuit {
    let mut out = circuit.clone();
    let mut tox = draw.tox_values.iter();
    let mut vth = draw.vth_deltas.iter();
    for d in &mut out.devices {
        match &mut d.kind {
            DeviceKind::Mtj { tox: t, .. } => {
                *t = *tox
                    .next()
                    .expect("draw has fewer junctions than the circuit")
            }
            DeviceKind::Mosfet { params, .. } => {
                params.vth0 += *vth
                    .next()
                    .expect("draw has fewer transistors than the circuit")
            }
            _ => {}
        }
    }
    assert!(
        tox.next().is_none() && vth.next().is_none(),
        "draw has more devices than the circuit"
    );
    out
}

/// Resistance of a single junction across `spec.samples` draws.
pub fn resistance_samples(spec: &VariationSpec, mtj: &MtjParams, state: MtjState) -> Vec<f64> {
    (0..spec.samples)
        .map(|i| {
            let z = if spec.sigma_tox_rel > 0.0 {
                unit_normal(spec.seed, i, DeviceClass::Mtj, 0)
            } else {
                0.0
            };
            mtj_resistance(mtj, state, mtj.tox0 * (1.0 + spec.sigma_tox_rel * z))
        })
        .collect()
}
