//! Parameterized netlists for the current-mode, voltage-mode and
//! neutralized voltage-mode sense amplifiers.
//!
//! Every design shares the same cell column, clamp biasing and clock plan; the
//! kinds differ in how the branch currents are turned into a latch decision.
//! Node names used by the metric extractors are exported as constants.

mod build;
mod timing;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::devices::{mos_caps, MosParams, MtjParams};

pub use build::build_design;
pub use timing::{default_timing, TimingPlan};

pub const NODE_SAOUT: &str = "saout";
pub const NODE_SAOUTB: &str = "saoutb";
pub const NODE_BL: &str = "bl";
pub const NODE_REFL: &str = "refl";
/// Gate of the data-side clamp MC.
pub const NODE_GC: &str = "gc";
/// Gate of the reference-side clamp MR.
pub const NODE_GR: &str = "gr";
pub const SUPPLY: &str = "vdd";
/// Element names of the data MTJ and the first reference MTJ.
pub const DATA_MTJ: &str = "Jdata";
pub const REF_MTJ_PREFIX: &str = "Jref";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SenseAmpKind {
    /// Clamped branch currents mirrored into a latched comparator.
    Current,
    /// Pre-charged bit lines discharged through the cells, then latched.
    Voltage,
    /// The voltage design plus cross-coupled neutralization capacitors.
    Neutralized,
}

impl SenseAmpKind {
    pub fn has_neutralization(self) -> bool {
        self == SenseAmpKind::Neutralized
    }
}

impl fmt::Display for SenseAmpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SenseAmpKind::Current => "csa",
            SenseAmpKind::Voltage => "vsa",
            SenseAmpKind::Neutralized => "nvsa",
        })
    }
}

/// Reference cell built from `series_count` in-plane MTJs in series, each with
/// `area_scale` times the data-cell area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub series_count: usize,
    pub area_scale: f64,
}

impl ReferenceConfig {
    /// One parallel-state MTJ identical to a data cell.
    pub fn single_p() -> Self {
        Self {
            series_count: 1,
            area_scale: 1.0,
        }
    }

    /// Three parallel-state MTJs in series, each three times larger, giving
    /// the single-cell resistance with three times the critical current.
    pub fn multi_3s() -> Self {
        Self {
            series_count: 3,
            area_scale: 3.0,
        }
    }

    pub fn is_single(&self) -> bool {
        self.series_count == 1
    }
}

/// One of the five named designs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignId {
    pub kind: SenseAmpKind,
    pub reference: ReferenceConfig,
}

impl DesignId {
    pub const ALL: [&'static str; 5] = ["csa-1ref", "vsa-1ref", "vsa-3s", "nvsa-1ref", "nvsa-3s"];

    pub fn all() -> Vec<DesignId> {
        Self::ALL.iter().map(|s| s.parse().unwrap()).collect()
    }
}

impl fmt::Display for DesignId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = if self.reference.is_single() {
            "1ref".to_string()
        } else {
            format!("{}s", self.reference.series_count)
        };
        write!(f, "{}-{}", self.kind, r)
    }
}

impl FromStr for DesignId {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, reference) = match s.to_ascii_lowercase().as_str() {
            "csa-1ref" => (SenseAmpKind::Current, ReferenceConfig::single_p()),
            "vsa-1ref" => (SenseAmpKind::Voltage, ReferenceConfig::single_p()),
            "vsa-3s" => (SenseAmpKind::Voltage, ReferenceConfig::multi_3s()),
            "nvsa-1ref" => (SenseAmpKind::Neutralized, ReferenceConfig::single_p()),
            "nvsa-3s" => (SenseAmpKind::Neutralized, ReferenceConfig::multi_3s()),
            _ => return Err(DesignError::UnknownDesign(s.to_string())),
        };
        Ok(Self { kind, reference })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error(
        "unknown design `{0}`; expected one of csa-1ref, vsa-1ref, vsa-3s, nvsa-1ref, nvsa-3s"
    )]
    UnknownDesign(String),
    #[error("{0} must be positive and finite, got {1}")]
    NonPositive(&'static str, f64),
    #[error("reference needs at least one MTJ")]
    EmptyReference,
    #[error("neutralization capacitors are only defined for voltage-mode designs")]
    NeutralizationOnCurrentMode,
    #[error("neutralization capacitor ({cap:e} F) does not match the clamp gate-drain capacitance ({clamp:e} F)")]
    Unbalanced { cap: f64, clamp: f64 },
}

/// Width and length of one transistor, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub w: f64,
    pub l: f64,
}

impl Size {
    pub const fn new(w: f64, l: f64) -> Self {
        Self { w, l }
    }
}

/// Circuit sizing shared by all designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SenseAmpParams {
    pub c_bl: f64,
    pub c_refl: f64,
    pub clamp: Size,
    /// MOS capacitor C1/C2; must equal the clamp size so that its overlap
    /// capacitance matches the clamp gate-drain capacitance.
    pub neutral_cap: Size,
    /// Output resistance of the VC and VR bias generators.
    pub bias_source_r: f64,
    pub access: Size,
    /// Scale the reference access transistor width with the reference MTJ area.
    pub scale_ref_access: bool,
    /// Pre-charge devices of the voltage designs, and the SAE header of the
    /// current-mode design.
    pub precharge: Size,
    pub equalizer: Size,
    pub isolation: Size,
    pub latch_n: Size,
    pub latch_p: Size,
    pub tail: Size,
    /// Clamp transistors of the current-mode design.
    pub csa_clamp: Size,
    /// Diode-connected load of the current-mode design.
    pub mirror_load: Size,
    /// Mirror output transistor of the current-mode design.
    pub mirror_out: Size,
    /// Capacitance on each latch output.
    pub c_out: f64,
    /// `None` follows the design kind; `Some` forces C1/C2 in or out of a
    /// voltage-mode design.
    pub neutralization: Option<bool>,
    pub nmos: MosParams,
    pub pmos: MosParams,
    pub mtj: MtjParams,
}

impl Default for SenseAmpParams {
    fn default() -> Self {
        let clamp = Size::new(4e-6, 100e-9);
        Self {
            c_bl: 50e-15,
            c_refl: 50e-15,
            clamp,
            neutral_cap: clamp,
            bias_source_r: 10e3,
            access: Size::new(4e-6, 100e-9),
            scale_ref_access: false,
            precharge: Size::new(4e-6, 100e-9),
            equalizer: Size::new(1e-6, 100e-9),
            isolation: Size::new(4e-6, 100e-9),
            latch_n: Size::new(1e-6, 100e-9),
            latch_p: Size::new(2e-6, 100e-9),
            tail: Size::new(2e-6, 100e-9),
            csa_clamp: Size::new(2e-6, 100e-9),
            mirror_load: Size::new(1e-6, 100e-9),
            mirror_out: Size::new(200e-9, 100e-9),
            c_out: 2e-15,
            neutralization: None,
            nmos: MosParams::nmos_default(),
            pmos: MosParams::pmos_default(),
            mtj: MtjParams::default(),
        }
    }
}

impl SenseAmpParams {
    fn validate(&self) -> Result<(), DesignError> {
        let scalars = [
            ("c_bl", self.c_bl),
            ("c_refl", self.c_refl),
            ("bias_source_r", self.bias_source_r),
            ("c_out", self.c_out),
        ];
        let sizes = [
            ("clamp", self.clamp),
            ("neutral_cap", self.neutral_cap),
            ("access", self.access),
            ("precharge", self.precharge),
            ("equalizer", self.equalizer),
            ("isolation", self.isolation),
            ("latch_n", self.latch_n),
            ("latch_p", self.latch_p),
            ("tail", self.tail),
            ("csa_clamp", self.csa_clamp),
            ("mirror_load", self.mirror_load),
            ("mirror_out", self.mirror_out),
        ];
        for (what, v) in scalars {
            if !(v.is_finite() && v > 0.0) {
                return Err(DesignError::NonPositive(what, v));
            }
        }
        for (what, s) in sizes {
            for v in [s.w, s.l] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(DesignError::NonPositive(what, v));
                }
            }
        }
        Ok(())
    }

    /// Whether C1/C2 are placed for a design of this kind.
    pub fn neutralized(&self, kind: SenseAmpKind) -> Result<bool, DesignError> {
        match (kind, self.neutralization) {
            (SenseAmpKind::Current, Some(true)) => Err(DesignError::NeutralizationOnCurrentMode),
            (SenseAmpKind::Current, _) => Ok(false),
            (_, Some(on)) => Ok(on),
            (k, None) => Ok(k.has_neutralization()),
        }
    }

    /// Overlap capacitance of one neutralization capacitor.
    pub fn neutral_cap_value(&self) -> f64 {
        mos_caps(
            &self
                .nmos
                .clone()
                .with_size(self.neutral_cap.w, self.neutral_cap.l),
        )
        .0
    }

    /// Gate-drain capacitance of a clamp transistor.
    pub fn clamp_cgd(&self) -> f64 {
        mos_caps(&self.nmos.clone().with_size(self.clamp.w, self.clamp.l)).0
    }
}

/// Relative mismatch `|C1 - C_GD| / C_GD` between the neutralization
/// capacitor and the clamp gate-drain capacitance.
pub fn capacitor_mismatch(params: &SenseAmpParams) -> f64 {
    let cgd = params.clamp_cgd();
    (params.neutral_cap_value() - cgd).abs() / cgd
}

/// Both sides of the two capacitive-divider balance conditions of the
/// neutralized clamps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub lhs1: f64,
    pub rhs1: f64,
    pub lhs2: f64,
    pub rhs2: f64,
}

impl Balance {
    /// Largest `|lhs - rhs|` of the two conditions.
    pub fn residual(&self) -> f64 {
        (self.lhs1 - self.rhs1)
            .abs()
            .max((self.lhs2 - self.rhs2).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("balance is undefined when SAOUT equals SAOUTB")]
pub struct EqualOutputs;

/// Evaluates
/// `(V_SAOUT - VC) / (V_SAOUT - V_SAOUTB)` against `C_GDC / (C1 + C_GDR)` and
/// `(V_SAOUTB - VR) / (V_SAOUTB - V_SAOUT)` against `C_GDR / (C2 + C_GDC)`.
#[allow(clippy::too_many_arguments)]
pub fn neutralization_balance(
    v_saout: f64,
    v_saoutb: f64,
    vc: f64,
    vr: f64,
    c_gdc: f64,
    c_gdr: f64,
    c1: f64,
    c2: f64,
) -> Result<Balance, EqualOutputs> {
    let swing = v_saout - v_saoutb;
    if swing == 0.0 {
        return Err(EqualOutputs);
    }
    Ok(Balance {
        lhs1: (v_saout - vc) / swing,
        rhs1: c_gdc / (c1 + c_gdr),
        lhs2: (v_saoutb - vr) / -swing,
        rhs2: c_gdr / (c2 + c_gdc),
    })
}
