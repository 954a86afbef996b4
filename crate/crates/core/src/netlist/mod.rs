//! A minimal SPICE dialect: parsing, hierarchy flattening and connectivity checks.
//!
//! Node names are case-insensitive and `gnd` is a synonym for `0`. Element and
//! subcircuit names keep their spelling but are compared case-insensitively.

mod flatten;
mod parse;
pub mod units;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use crate::devices::{MosParams, MtjParams, MtjState, Polarity, Waveform};

pub use flatten::{flatten_hierarchy, FlattenError};
pub use parse::{parse_netlist, ParseError, ParseErrorKind};
pub use validate::{dc_isolated_nodes, validate_circuit, Diagnostic, DiagnosticKind};

use units::format_value;

/// Name of the ground node after normalization.
pub const GROUND: &str = "0";

/// Parsed, not yet flattened, circuit description.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    pub title: String,
    pub elements: Vec<ElementLine>,
    pub subcircuits: BTreeMap<String, Subckt>,
    /// `.param` assignments; only model-default names are accepted.
    pub params: BTreeMap<String, f64>,
    pub analyses: Vec<AnalysisDirective>,
    pub globals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subckt {
    pub name: String,
    pub ports: Vec<String>,
    pub elements: Vec<ElementLine>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalysisDirective {
    Tran { step: f64, stop: f64 },
}

/// One element statement with its nodes already normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementLine {
    pub name: String,
    pub nodes: Vec<String>,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor {
        ohms: f64,
    },
    Capacitor {
        farads: f64,
        ic: Option<f64>,
    },
    Mosfet {
        polarity: Polarity,
        w: f64,
        l: f64,
        overrides: MosOverrides,
    },
    Mtj {
        state: MtjState,
        area: Option<f64>,
        tox: Option<f64>,
    },
    Vsource(SourceValue),
    Instance {
        subckt: String,
    },
}

/// Per-instance replacements for the model-card values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MosOverrides {
    pub vth0: Option<f64>,
    pub kprime: Option<f64>,
    pub lambda: Option<f64>,
    pub cox_overlap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceValue {
    Dc(f64),
    Pwl(Vec<(f64, f64)>),
}

impl ElementLine {
    pub fn resistor(name: &str, a: &str, b: &str, ohms: f64) -> Self {
        Self::new(name, &[a, b], ElementKind::Resistor { ohms })
    }

    pub fn capacitor(name: &str, a: &str, b: &str, farads: f64) -> Self {
        Self::new(name, &[a, b], ElementKind::Capacitor { farads, ic: None })
    }

    pub fn mosfet(name: &str, nodes: [&str; 4], polarity: Polarity, w: f64, l: f64) -> Self {
        Self::new(
            name,
            &nodes,
            ElementKind::Mosfet {
                polarity,
                w,
                l,
                overrides: MosOverrides::default(),
            },
        )
    }

    pub fn mtj(name: &str, a: &str, b: &str, state: MtjState, area: f64, tox: f64) -> Self {
        Self::new(
            name,
            &[a, b],
            ElementKind::Mtj {
                state,
                area: Some(area),
                tox: Some(tox),
            },
        )
    }

    pub fn vsource(name: &str, p: &str, n: &str, value: SourceValue) -> Self {
        Self::new(name, &[p, n], ElementKind::Vsource(value))
    }

    pub fn instance(name: &str, nodes: &[&str], subckt: &str) -> Self {
        Self::new(
            name,
            nodes,
            ElementKind::Instance {
                subckt: subckt.to_ascii_lowercase(),
            },
        )
    }

    fn new(name: &str, nodes: &[&str], kind: ElementKind) -> Self {
        Self {
            name: name.to_string(),
            nodes: nodes.iter().map(|n| normalize_node(n)).collect(),
            kind,
        }
    }

    /// Number of terminals the element kind requires, `None` for instances.
    pub fn expected_arity(&self) -> Option<usize> {
        match self.kind {
            ElementKind::Mosfet { .. } => Some(4),
            ElementKind::Instance { .. } => None,
            _ => Some(2),
        }
    }
}

pub(crate) fn normalize_node(name: &str) -> String {
    let lower = name.to_ascii_lowercase();
    if lower == "gnd" {
        GROUND.to_string()
    } else {
        lower
    }
}

/// Model-card defaults, adjustable with `.param`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDefaults {
    pub nmos: MosParams,
    pub pmos: MosParams,
    pub mtj: MtjParams,
}

impl Default for ModelDefaults {
    fn default() -> Self {
        Self {
            nmos: MosParams::nmos_default(),
            pmos: MosParams::pmos_default(),
            mtj: MtjParams::default(),
        }
    }
}

/// `.param` names understood by [`ModelDefaults::apply`].
pub const MODEL_PARAMS: &[&str] = &[
    "vth0_n", "vth0_p", "kp_n", "kp_p", "lambda_n", "lambda_p", "cov", "mtj_ra", "mtj_tmr",
    "mtj_beta", "mtj_jc0", "mtj_tox0",
];

impl ModelDefaults {
    pub fn from_params(params: &BTreeMap<String, f64>) -> Self {
        let mut defaults = Self::default();
        for (name, &value) in params {
            defaults.apply(name, value);
        }
        defaults
    }

    /// Returns false for names outside [`MODEL_PARAMS`].
    pub fn apply(&mut self, name: &str, value: f64) -> bool {
        match name {
            "vth0_n" => self.nmos.vth0 = value,
            "vth0_p" => self.pmos.vth0 = value,
            "kp_n" => self.nmos.kprime = value,
            "kp_p" => self.pmos.kprime = value,
            "lambda_n" => self.nmos.lambda = value,
            "lambda_p" => self.pmos.lambda = value,
            "cov" => {
                self.nmos.cox_overlap = value;
                self.pmos.cox_overlap = value;
            }
            "mtj_ra" => self.mtj.ra_p = value,
            "mtj_tmr" => self.mtj.tmr = value,
            "mtj_beta" => self.mtj.beta = value,
            "mtj_jc0" => self.mtj.jc0 = value,
            "mtj_tox0" => self.mtj.tox0 = value,
            _ => return false,
        }
        true
    }
}

impl fmt::Display for SourceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceValue::Dc(v) => write!(f, "DC {}", format_value(*v)),
            SourceValue::Pwl(points) => {
                write!(f, "PWL(")?;
                for (i, (t, v)) in points.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{} {}", format_value(*t), format_value(*v))?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for ElementLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name, self.nodes.join(" "))?;
        match &self.kind {
            ElementKind::Resistor { ohms } => write!(f, " {}", format_value(*ohms)),
            ElementKind::Capacitor { farads, ic } => {
                write!(f, " {}", format_value(*farads))?;
                if let Some(ic) = ic {
                    write!(f, " ic={}", format_value(*ic))?;
                }
                Ok(())
            }
            ElementKind::Mosfet {
                polarity,
                w,
                l,
                overrides,
            } => {
                write!(
                    f,
                    " {polarity} W={} L={}",
                    format_value(*w),
                    format_value(*l)
                )?;
                let optional = [
                    ("vth0", overrides.vth0),
                    ("kp", overrides.kprime),
                    ("lambda", overrides.lambda),
                    ("cov", overrides.cox_overlap),
                ];
                for (key, value) in optional {
                    if let Some(v) = value {
                        write!(f, " {key}={}", format_value(v))?;
                    }
                }
                Ok(())
            }
            ElementKind::Mtj { state, area, tox } => {
                write!(f, " state={state}")?;
                if let Some(a) = area {
                    write!(f, " area={}", format_value(*a))?;
                }
                if let Some(t) = tox {
                    write!(f, " tox={}", format_value(*t))?;
                }
                Ok(())
            }
            ElementKind::Vsource(value) => write!(f, " {value}"),
            ElementKind::Instance { subckt } => write!(f, " {subckt}"),
        }
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "* {}", self.title)?;
        if !self.globals.is_empty() {
            writeln!(f, ".global {}", self.globals.join(" "))?;
        }
        for (name, value) in &self.params {
            writeln!(f, ".param {name}={}", format_value(*value))?;
        }
        for sub in self.subcircuits.values() {
            writeln!(f, ".subckt {} {}", sub.name, sub.ports.join(" "))?;
            for e in &sub.elements {
                writeln!(f, "{e}")?;
            }
            writeln!(f, ".ends")?;
        }
        for e in &self.elements {
            writeln!(f, "{e}")?;
        }
        for a in &self.analyses {
            match a {
                AnalysisDirective::Tran { step, stop } => {
                    writeln!(f, ".tran {} {}", format_value(*step), format_value(*stop))?
                }
            }
        }
        writeln!(f, ".end")
    }
}

/// A flattened circuit: node 0 is ground, every device refers to node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCircuit {
    pub node_names: Vec<String>,
    pub devices: Vec<Device>,
    /// Initial node voltages requested with `ic=` on grounded capacitors.
    pub initial: Vec<(usize, f64)>,
    /// `(step, stop)` from a `.tran` directive.
    pub tran: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub name: String,
    pub kind: DeviceKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeviceKind {
    Resistor {
        a: usize,
        b: usize,
        ohms: f64,
    },
    Capacitor {
        a: usize,
        b: usize,
        farads: f64,
    },
    Mosfet {
        d: usize,
        g: usize,
        s: usize,
        b: usize,
        params: MosParams,
    },
    Mtj {
        a: usize,
        b: usize,
        params: MtjParams,
        state: MtjState,
        tox: f64,
    },
    Vsource {
        p: usize,
        n: usize,
        wave: Waveform,
    },
}

impl DeviceKind {
    pub fn terminals(&self) -> Vec<usize> {
        match *self {
            DeviceKind::Resistor { a, b, .. }
            | DeviceKind::Capacitor { a, b, .. }
            | DeviceKind::Mtj { a, b, .. } => vec![a, b],
            DeviceKind::Vsource { p, n, .. } => vec![p, n],
            DeviceKind::Mosfet { d, g, s, b, .. } => vec![d, g, s, b],
        }
    }
}

impl FlatCircuit {
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        let name = normalize_node(name);
        self.node_names.iter().position(|n| *n == name)
    }

    pub fn device(&self, name: &str) -> Option<&Device> {
        self.devices
            .iter()
            .find(|d| d.name.eq_ignore_ascii_case(name))
    }

    pub fn device_mut(&mut self, name: &str) -> Option<&mut Device> {
        self.devices
            .iter_mut()
            .find(|d| d.name.eq_ignore_ascii_case(name))
    }

    /// Names of voltage sources, in device order.
    pub fn source_names(&self) -> Vec<&str> {
        self.devices
            .iter()
            .filter(|d| matches!(d.kind, DeviceKind::Vsource { .. }))
            .map(|d| d.name.as_str())
            .collect()
    }
}
