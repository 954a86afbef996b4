//! Level-1 square-law MOSFET.
//!
//! Cutoff below threshold, triode and saturation above it, with channel-length
//! modulation applied in both conducting regions so that the current and its
//! derivatives are continuous at the triode/saturation boundary. There is no
//! subthreshold conduction and no body effect.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Nmos,
    Pmos,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Nmos => "nmos",
            Polarity::Pmos => "pmos",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosParams {
    pub polarity: Polarity,
    /// Threshold voltage, negative for pmos.
    pub vth0: f64,
    /// Process transconductance k' = µ·Cox (A/V²).
    pub kprime: f64,
    /// Channel-length modulation (1/V).
    pub lambda: f64,
    pub w: f64,
    pub l: f64,
    /// Gate overlap capacitance per unit width (F/m).
    pub cox_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MosParamsError {
    #[error("MOSFET {0} must be positive")]
    NonPositive(&'static str),
    #[error("MOSFET {0} must be non-negative")]
    Negative(&'static str),
}

impl MosParams {
    pub fn nmos_default() -> Self {
        Self {
            polarity: Polarity::Nmos,
            vth0: 0.40,
            kprime: 200e-6,
            lambda: 0.1,
            w: 1e-6,
            l: 100e-9,
            cox_overlap: 0.5e-9,
        }
    }

    pub fn pmos_default() -> Self {
        Self {
            polarity: Polarity::Pmos,
            vth0: -0.42,
            kprime: 80e-6,
            ..Self::nmos_default()
        }
    }

    pub fn with_size(mut self, w: f64, l: f64) -> Self {
        self.w = w;
        self.l = l;
        self
    }

    pub fn validate(&self) -> Result<(), MosParamsError> {
        if !(self.w > 0.0) {
            return Err(MosParamsError::NonPositive("width"));
        }
        if !(self.l > 0.0) {
            return Err(MosParamsError::NonPositive("length"));
        }
        if !(self.kprime > 0.0) {
            return Err(MosParamsError::NonPositive("kprime"));
        }
        if !(self.lambda >= 0.0) {
            return Err(MosParamsError::Negative("lambda"));
        }
        if !(self.cox_overlap >= 0.0) {
            return Err(MosParamsError::Negative("cox_overlap"));
        }
        Ok(())
    }

    fn beta(&self) -> f64 {
        self.kprime * self.w / self.l
    }
}

/// Drain current (drain to source) and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosEval {
    pub ids: f64,
    pub gm: f64,
    pub gds: f64,
}

/// Forward-mode nmos equations for vds >= 0, threshold `vth` > 0 convention.
fn forward(beta: f64, vth: f64, lambda: f64, vgs: f64, vds: f64) -> MosEval {
    let vov = vgs - vth;
    if vov <= 0.0 {
        return MosEval {
            ids: 0.0,
            gm: 0.0,
            gds: 0.0,
        };
    }
    let clm = 1.0 + lambda * vds;
    if vds < vov {
        let core = vov * vds - 0.5 * vds * vds;
        MosEval {
            ids: beta * core * clm,
            gm: beta * vds * clm,
            gds: beta * ((vov - vds) * clm + core * lambda),
        }
    } else {
        let core = 0.5 * vov * vov;
        MosEval {
            ids: beta * core * clm,
            gm: beta * vov * clm,
            gds: beta * core * lambda,
        }
    }
}

/// nmos-frame evaluation including source/drain exchange for vds < 0.
fn symmetric(beta: f64, vth: f64, lambda: f64, vgs: f64, vds: f64) -> MosEval {
    if vds >= 0.0 {
        forward(beta, vth, lambda, vgs, vds)
    } else {
        // roles swap: gate-to-(new source) is vgs - vds, new vds is -vds
        let r = forward(beta, vth, lambda, vgs - vds, -vds);
        MosEval {
            ids: -r.ids,
            gm: -r.gm,
            gds: r.gm + r.gds,
        }
    }
}

/// Evaluates the drain-to-source current at terminal voltages `vgs`, `vds`.
///
/// For pmos the nmos equations are applied to the negated voltages and the
/// current sign is flipped; `gm` and `gds` remain the partial derivatives with
/// respect to the caller's `vgs` and `vds`.
pub fn mos_eval(p: &MosParams, vgs: f64, vds: f64) -> MosEval {
    let beta = p.beta();
    match p.polarity {
        Polarity::Nmos => symmetric(beta, p.vth0, p.lambda, vgs, vds),
        Polarity::Pmos => {
            let r = symmetric(beta, -p.vth0, p.lambda, -vgs, -vds);
            MosEval {
                ids: -r.ids,
                gm: r.gm,
                gds: r.gds,
            }
        }
    }
}

/// Constant overlap capacitances `(cgd, cgs)`.
pub fn mos_caps(p: &MosParams) -> (f64, f64) {
    let c = p.cox_overlap * p.w;
    (c, c)
}
