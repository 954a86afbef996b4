//! Solver results against closed forms and independently solved circuits.

use std::collections::BTreeMap;

use approx::assert_relative_eq;
use mramsim::netlist::{flatten_hierarchy, parse_netlist, FlatCircuit};
use mramsim::solver::{dc_operating_point, transient_analysis, SolverConfig};

fn circuit(text: &str) -> FlatCircuit {
    flatten_hierarchy(&parse_netlist(text).unwrap()).unwrap()
}

fn cfg(dt: f64, t_stop: f64) -> SolverConfig {
    SolverConfig {
        dt,
        t_stop,
        ..SolverConfig::default()
    }
}

/// Max error of the RC discharge from 1 V, normalized to the initial voltage.
fn rc_discharge_error(dt: f64) -> f64 {
    let c = circuit("R1 a 0 1k\nC1 a 0 50f ic=1\n");
    let tr = transient_analysis(&c, &cfg(dt, 500e-12), &BTreeMap::new()).unwrap();
    let v = tr.node("a").unwrap();
    let tau = 1e3 * 50e-15;
    tr.times
        .iter()
        .zip(v)
        .map(|(t, v)| (v - (-t / tau).exp()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rc_discharge_first_order_convergence() {
    let e1 = rc_discharge_error(1e-12);
    let e2 = rc_discharge_error(0.5e-12);
    assert!(e1 < 0.005, "{e1}");
    let ratio = e1 / e2;
    assert!((1.8..=2.2).contains(&ratio), "{ratio}");
}

#[test]
fn rc_charge_through_source() {
    // step at 10 ps into R = 2k, C = 100 fF; tau = 200 ps
    let c = circuit("V1 in 0 PWL(0 0 10p 0 10.001p 1)\nR1 in out 2k\nC1 out 0 100f\n");
    let tr = transient_analysis(&c, &cfg(0.5e-12, 2e-9), &BTreeMap::new()).unwrap();
    let tau: f64 = 200e-12;
    for t in [200e-12f64, 500e-12, 1e-9] {
        let exact = 1.0 - (-(t - 10.001e-12) / tau).exp();
        let got = tr.value_at("out", t).unwrap();
        assert!((got - exact).abs() < 3e-3, "t={t}: {got} vs {exact}");
    }
}

#[test]
fn wheatstone_bridge() {
    // node voltages by hand: mesh solve of a 1 V bridge with a 3k cross resistor
    let op = dc_operating_point(
        &circuit("V1 top 0 DC 1\nR1 top a 1k\nR2 a 0 2k\nR3 top b 2k\nR4 b 0 1k\nR5 a b 3k\n"),
        &SolverConfig::default(),
    )
    .unwrap();
    // KCL in kΩ and mA:
    //   (1-a)/1 = a/2 + (a-b)/3   ->  11a - 2b = 6
    //   (1-b)/2 + (a-b)/3 = b/1   ->  2a - 11b = -3
    // giving a = 8/13, b = 5/13
    assert_relative_eq!(op.node_voltages[2], 8.0 / 13.0, max_relative = 1e-8);
    assert_relative_eq!(op.node_voltages[3], 5.0 / 13.0, max_relative = 1e-8);
    // (1 - 8/13)/1k + (1 - 5/13)/2k = 9/13 mA
    assert_relative_eq!(
        op.source_current("v1").unwrap(),
        9e-3 / 13.0,
        max_relative = 1e-8
    );
}

/// Diode-connected nMOS fed from 1 V through 10 kΩ, solved by bisection on the
/// square law written out here.
#[test]
fn diode_connected_nmos_against_bisection() {
    let (beta, vth, lambda) = (200e-6 * 10.0, 0.4, 0.1);
    let id = |v: f64| {
        if v <= vth {
            0.0
        } else {
            0.5 * beta * (v - vth).powi(2) * (1.0 + lambda * v)
        }
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (1.0 - mid) / 10e3 > id(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let op = dc_operating_point(
        &circuit("Vdd vdd 0 DC 1\nR1 vdd d 10k\nM1 d d 0 0 nmos W=1u L=100n\n"),
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(
        (op.node_voltages[2] - lo).abs() < 1e-6,
        "{} vs {lo}",
        op.node_voltages[2]
    );
}

#[test]
fn two_diode_stack() {
    // two series diode-connected devices share the current; the bottom one
    // sits at the single-device solution for that current
    let op = dc_operating_point(
        &circuit("Vdd vdd 0 DC 2\nR1 vdd a 5k\nM1 a a b 0 nmos W=1u L=100n lambda=0\nM2 b b 0 0 nmos W=1u L=100n lambda=0\n"),
        &SolverConfig::default(),
    )
    .unwrap();
    let (va, vb) = (op.node_voltages[2], op.node_voltages[3]);
    let i = (2.0 - va) / 5e3;
    let beta = 200e-6 * 10.0;
    assert_relative_eq!(i, 0.5 * beta * (vb - 0.4).powi(2), max_relative = 1e-5);
    assert_relative_eq!(i, 0.5 * beta * (va - vb - 0.4).powi(2), max_relative = 1e-5);
}

#[test]
fn capacitive_divider_shares_charge() {
    // series 1f and 3f driven by a fast 1 V step: the middle node takes
    // C1 / (C1 + C2) of the step
    let c = circuit("V1 in 0 PWL(0 0 1p 1)\nC1 in mid 1f\nC2 mid 0 3f\nR1 mid 0 1G\n");
    let tr = transient_analysis(&c, &cfg(0.1e-12, 5e-12), &BTreeMap::new()).unwrap();
    let mid = tr.value_at("mid", 5e-12).unwrap();
    assert!((mid - 0.25).abs() < 1e-3, "{mid}");
}

#[test]
fn halving_dt_keeps_grid_values_close() {
    let c = circuit("V1 in 0 PWL(0 0 50p 1)\nR1 in out 1k\nC1 out 0 50f\n");
    let a = transient_analysis(&c, &cfg(1e-12, 300e-12), &BTreeMap::new()).unwrap();
    let b = transient_analysis(&c, &cfg(0.5e-12, 300e-12), &BTreeMap::new()).unwrap();
    for t in [50e-12, 100e-12, 300e-12] {
        let d = (a.value_at("out", t).unwrap() - b.value_at("out", t).unwrap()).abs();
        assert!(d < 5e-3, "t={t}: {d}");
    }
}
