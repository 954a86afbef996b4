//! Piecewise-linear voltage waveforms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveformError {
    #[error("waveform needs at least one point")]
    Empty,
    #[error("waveform times must be strictly increasing")]
    NotIncreasing,
    #[error("waveform values must be finite")]
    NonFinite,
}

/// `(time, value)` breakpoints; the value is held before the first and after the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    points: Vec<(f64, f64)>,
}

impl Waveform {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, WaveformError> {
        if points.is_empty() {
            return Err(WaveformError::Empty);
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(WaveformError::NonFinite);
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(WaveformError::NotIncreasing);
        }
        Ok(Self { points })
    }

    pub fn dc(value: f64) -> Self {
        Self {
            points: vec![(0.0, value)],
        }
    }

    /// Trapezoidal pulse from `low` to `high`: the rising edge starts at
    /// `rise_at`, the falling edge starts `width` later, both last `edge`.
    pub fn pulse(low: f64, high: f64, rise_at: f64, width: f64, edge: f64) -> Self {
        let mut points = Vec::with_capacity(5);
        if rise_at > 0.0 {
            points.push((0.0, low));
        }
        points.extend([
            (rise_at, low),
            (rise_at + edge, high),
            (rise_at + width, high),
            (rise_at + width + edge, low),
        ]);
        Self { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn value_at(&self, t: f64) -> f64 {
        pwl_value(self, t)
    }

    pub fn is_dc(&self) -> bool {
        self.points.len() == 1
    }
}

/// Linear interpolation between the bracketing breakpoints, clamped at the ends.
pub fn pwl_value(w: &Waveform, t: f64) -> f64 {
    let pts = &w.points;
    let first = pts[0];
    if t <= first.0 {
        return first.1;
    }
    let last = pts[pts.len() - 1];
    if t >= last.0 {
        return last.1;
    }
    let i = pts.partition_point(|p| p.0 <= t);
    let (t0, v0) = pts[i - 1];
    let (t1, v1) = pts[i];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_hold() {
        let w = Waveform::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 2.0)]).unwrap();
        assert_eq!(pwl_value(&w, -1.0), 0.0);
        assert_eq!(pwl_value(&w, 0.5), 1.0);
        assert_eq!(pwl_value(&w, 1.0), 2.0);
        assert_eq!(pwl_value(&w, 10.0), 2.0);
    }

    #[test]
    fn rejects_bad_points() {
        assert_eq!(Waveform::new(vec![]), Err(WaveformError::Empty));
        assert_eq!(
            Waveform::new(vec![(0.0, 0.0), (0.0, 1.0)]),
            Err(WaveformError::NotIncreasing)
        );
        assert_eq!(
            Waveform::new(vec![(0.0, f64::NAN)]),
            Err(WaveformError::NonFinite)
        );
    }

    #[test]
    fn pulse_shape() {
        let w = Waveform::pulse(0.0, 1.0, 0.5e-9, 0.5e-9, 10e-12);
        assert_eq!(w.value_at(0.4e-9), 0.0);
        assert_eq!(w.value_at(0.5e-9), 0.0);
        assert!((w.value_at(0.505e-9) - 0.5).abs() < 1e-9);
        assert_eq!(w.value_at(0.6e-9), 1.0);
        assert_eq!(w.value_at(1.0e-9), 1.0);
        assert_eq!(w.value_at(1.2e-9), 0.0);
    }

    #[test]
    fn pulse_starting_at_zero() {
        let w = Waveform::pulse(0.0, 1.0, 0.0, 1e-9, 10e-12);
        assert!(Waveform::new(w.points().to_vec()).is_ok());
        assert_eq!(w.points()[0], (0.0, 0.0));
        assert_eq!(w.value_at(0.5e-9), 1.0);
    }
}
