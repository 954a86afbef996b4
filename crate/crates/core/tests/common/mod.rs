//! Helpers shared by integration test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use mramsim::metrics::{extract_power_integrated, power_dynamic_model, PowerModel, READ_FREQUENCY};
use mramsim::netlist::{flatten_hierarchy, parse_netlist, FlatCircuit};
use mramsim::senseamps::SenseAmpParams;
use mramsim::solver::{transient_analysis, SolverConfig};

pub fn circuit(text: &str) -> FlatCircuit {
    flatten_hierarchy(&parse_netlist(text).unwrap()).unwrap()
}

/// Pre-charges discharged BL and REFL capacitances to VDD once through small
/// pMOS switches. Returns `(integrated, model)` power at the read frequency.
///
/// The switches are 500 nm wide so their overlap charge stays near 1 % of the
/// line charge.
pub fn precharge_power(params: &SenseAmpParams) -> (f64, f64) {
    let text = format!(
        "Vdd vdd 0 DC 1\n\
         Vpc pcb 0 PWL(0 1 100p 1 110p 0)\n\
         Mp1 bl pcb vdd vdd pmos W=500n L=100n\n\
         Mp2 refl pcb vdd vdd pmos W=500n L=100n\n\
         Cbl bl 0 {} ic=0\n\
         Crefl refl 0 {} ic=0\n",
        params.c_bl, params.c_refl
    );
    let cfg = SolverConfig {
        dt: 1e-12,
        t_stop: 6e-9,
        ..SolverConfig::default()
    };
    let tr = transient_analysis(&circuit(&text), &cfg, &BTreeMap::new()).unwrap();
    let integrated = extract_power_integrated(&tr, 1.0, READ_FREQUENCY);
    let model = power_dynamic_model(&PowerModel {
        activity: 1.0,
        c_total: params.c_bl + params.c_refl,
        v_swing: 1.0,
        vdd: 1.0,
        f: READ_FREQUENCY,
    });
    (integrated, model)
}
