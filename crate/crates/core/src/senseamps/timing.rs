//! Read-cycle clock plan.

use serde::{Deserialize, Serialize};

use crate::devices::Waveform;

/// Word line, sense enable and isolation clocks for one read, plus the supply
/// and clamp bias levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingPlan {
    pub wl: Waveform,
    pub sae: Waveform,
    pub sae1: Waveform,
    pub vdd: f64,
    pub vc: f64,
    pub vr: f64,
    pub edge_time: f64,
    /// Rising-edge start times, kept for metric extraction.
    pub wl_rise: f64,
    pub wl_fall: f64,
    pub sae_rise: f64,
    pub sae1_rise: f64,
}

impl TimingPlan {
    /// Builds a plan from pulse start times and widths.
    pub fn from_pulses(
        vdd: f64,
        vc: f64,
        vr: f64,
        edge: f64,
        wl: (f64, f64),
        sae: (f64, f64),
        sae1: (f64, f64),
    ) -> Self {
        Self {
            wl: Waveform::pulse(0.0, vdd, wl.0, wl.1, edge),
            sae: Waveform::pulse(0.0, vdd, sae.0, sae.1, edge),
            sae1: Waveform::pulse(0.0, vdd, sae1.0, sae1.1, edge),
            vdd,
            vc,
            vr,
            edge_time: edge,
            wl_rise: wl.0,
            wl_fall: wl.0 + wl.1,
            sae_rise: sae.0,
            sae1_rise: sae1.0,
        }
    }

    /// Instant at which the decision is read: the end of the word-line pulse.
    pub fn decision_time(&self) -> f64 {
        self.wl_fall
    }

    /// Complement of a clock, `vdd - v(t)`.
    pub fn inverted(&self, w: &Waveform) -> Waveform {
        Waveform::new(w.points().iter().map(|&(t, v)| (t, self.vdd - v)).collect())
            .expect("complement of a valid waveform")
    }
}

/// WL at 0 ns for 1 ns, SAE at 0.5 ns for 0.5 ns, SAE1 at 0.75 ns for 0.25 ns,
/// 10 ps edges, VDD = 1.0 V, VC = 0.8 V, VR = 0.7 V.
pub fn default_timing() -> TimingPlan {
    TimingPlan::from_pulses(
        1.0,
        0.8,
        0.7,
        10e-12,
        (0.0, 1.0e-9),
        (0.5e-9, 0.5e-9),
        (0.75e-9, 0.25e-9),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_values() {
        let p = default_timing();
        assert_eq!(p.wl.value_at(0.5e-9), 1.0);
        assert_eq!(p.sae.value_at(0.4e-9), 0.0);
        assert_eq!(p.sae.value_at(0.6e-9), 1.0);
        assert_eq!(p.sae1.value_at(0.7e-9), 0.0);
        assert_eq!(p.sae1.value_at(0.9e-9), 1.0);
        assert_eq!(p.vc, 0.8);
        assert_eq!(p.vr, 0.7);
        assert_eq!(p.vdd, 1.0);
        assert_eq!(p.sae.value_at(5e-9), 0.0);
    }

    #[test]
    fn ordering_invariants() {
        let p = default_timing();
        assert_eq!(p.wl_rise, 0.0);
        assert!(p.sae_rise > p.wl_rise);
        assert!(p.sae1_rise > p.sae_rise);
        let t_stop = 2e-9;
        for w in [&p.wl, &p.sae, &p.sae1] {
            let last = *w.points().last().unwrap();
            assert!(last.0 <= t_stop);
            assert_eq!(last.1, 0.0);
        }
    }

    #[test]
    fn complement() {
        let p = default_timing();
        let saeb = p.inverted(&p.sae);
        assert_eq!(saeb.value_at(0.2e-9), 1.0);
        assert_eq!(saeb.value_at(0.7e-9), 0.0);
    }
}
