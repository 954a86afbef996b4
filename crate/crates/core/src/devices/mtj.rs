//! Interfacial perpendicular tunnel junction, read-only resistance model.
//!
//! Resistance follows the barrier exponentially:
//! `R = RA_state · exp(beta · (tox - tox0)) / area`, with `RA_AP = RA_P · (1 + TMR)`.
//! Both states share `beta`, so their relative spread under oxide variation is equal.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MtjState {
    /// Parallel, low resistance.
    P,
    /// Antiparallel, high resistance.
    Ap,
}

impl MtjState {
    pub fn flipped(self) -> Self {
        match self {
            MtjState::P => MtjState::Ap,
            MtjState::Ap => MtjState::P,
        }
    }
}

impl fmt::Display for MtjState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MtjState::P => "P",
            MtjState::Ap => "AP",
        })
    }
}

impl std::str::FromStr for MtjState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "P" => Ok(MtjState::P),
            "AP" => Ok(MtjState::Ap),
            _ => Err(format!("invalid state `{s}`, expected P or AP")),
        }
    }
}

/// Nominal parallel-state resistance of a 40 nm x 40 nm cell.
pub const NOMINAL_R_P: f64 = 742.0;
/// Nominal antiparallel-state resistance of the same cell.
pub const NOMINAL_R_AP: f64 = 1970.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtjParams {
    /// Junction area (m²).
    pub area: f64,
    /// Nominal barrier thickness (m).
    pub tox0: f64,
    /// Parallel-state resistance-area product at `tox0` (Ω·m²).
    pub ra_p: f64,
    /// Tunnel magnetoresistance ratio.
    pub tmr: f64,
    /// Exponential barrier sensitivity (1/m).
    pub beta: f64,
    /// Critical switching current density (A/m²).
    pub jc0: f64,
}

impl Default for MtjParams {
    fn default() -> Self {
        let area = 40e-9 * 40e-9;
        Self {
            area,
            tox0: 1e-9,
            ra_p: NOMINAL_R_P * area,
            tmr: (NOMINAL_R_AP - NOMINAL_R_P) / NOMINAL_R_P,
            // 13 % (3σ) resistance spread from 2 % (3σ) tox spread at 1 nm
            beta: 6.5e9,
            // 3 MA/cm²
            jc0: 3e10,
        }
    }
}

impl MtjParams {
    pub fn ra(&self, state: MtjState) -> f64 {
        match state {
            MtjState::P => self.ra_p,
            MtjState::Ap => self.ra_p * (1.0 + self.tmr),
        }
    }
}

/// Junction resistance at barrier thickness `tox`. Exact nominal value at `tox0`.
pub fn mtj_resistance(p: &MtjParams, state: MtjState, tox: f64) -> f64 {
    debug_assert!(tox > 0.0);
    let dt = tox - p.tox0;
    let r = p.ra(state) / p.area;
    if dt == 0.0 {
        r
    } else {
        r * (p.beta * dt).exp()
    }
}

/// Critical current of one element of a stack whose elements are scaled to
/// `area_scale` times the nominal area. Stacking in series does not change it.
pub fn mtj_critical_current(p: &MtjParams, series_count: usize, area_scale: f64) -> f64 {
    debug_assert!(series_count >= 1 && area_scale > 0.0);
    p.jc0 * p.area * area_scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nominal_resistances() {
        let p = MtjParams::default();
        assert_relative_eq!(
            mtj_resistance(&p, MtjState::P, 1e-9),
            742.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            mtj_resistance(&p, MtjState::Ap, 1e-9),
            1970.0,
            max_relative = 1e-12
        );
        // implied TMR of the two nominal resistances
        assert_relative_eq!(p.tmr, 1228.0 / 742.0, max_relative = 1e-12);
        assert!((p.tmr - 1.655).abs() < 1e-3);
    }

    #[test]
    fn identity_at_tox0() {
        let p = MtjParams {
            beta: 123.456e9,
            ..MtjParams::default()
        };
        assert_eq!(mtj_resistance(&p, MtjState::P, p.tox0), p.ra_p / p.area);
    }

    #[test]
    fn doubles_after_ln2_over_beta() {
        let p = MtjParams::default();
        let tox = p.tox0 + std::f64::consts::LN_2 / p.beta;
        assert_relative_eq!(
            mtj_resistance(&p, MtjState::P, tox),
            1484.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn critical_current() {
        let p = MtjParams::default();
        assert_relative_eq!(
            mtj_critical_current(&p, 1, 1.0),
            48e-6,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            mtj_critical_current(&p, 1, 3.0),
            144e-6,
            max_relative = 1e-12
        );
        assert_eq!(
            mtj_critical_current(&p, 3, 1.0),
            mtj_critical_current(&p, 1, 1.0)
        );
    }

    #[test]
    fn state_parsing() {
        assert_eq!("ap".parse::<MtjState>(), Ok(MtjState::Ap));
        assert_eq!("P".parse::<MtjState>(), Ok(MtjState::P));
        assert!("x".parse::<MtjState>().is_err());
        assert_eq!(MtjState::P.flipped(), MtjState::Ap);
    }
}
