//! Device constitutive relations.

mod mos;
mod mtj;
mod waveform;

pub use mos::{mos_caps, mos_eval, MosEval, MosParams, MosParamsError, Polarity};
pub use mtj::{mtj_critical_current, mtj_resistance, MtjParams, MtjState};
pub use waveform::{pwl_value, Waveform, WaveformError};
