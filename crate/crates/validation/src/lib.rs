//! Acceptance checks for the simulator. Each check runs its own campaign and
//! compares the outcome with a fixed ordering, calibration or oracle.
//!
//! Monte Carlo ensembles are cached in a [`Campaign`] and extended in place, so
//! the power, delay, error-rate and merge checks share their transients.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use mramsim::devices::{MtjParams, MtjState};
use mramsim::metrics::{
    cell_currents, extract_decision, extract_power_integrated, gate_disturbance,
    power_dynamic_model, Decision, PowerModel, READ_FREQUENCY,
};
use mramsim::netlist::{flatten_hierarchy, parse_netlist, FlatCircuit};
use mramsim::senseamps::{
    default_timing, neutralization_balance, DesignId, SenseAmpParams, DATA_MTJ, NODE_SAOUT,
    NODE_SAOUTB,
};
use mramsim::solver::{transient_analysis, SolverConfig};
use mramsim::variation::{
    calibrate_beta, resistance_samples, run_ensemble, run_ensemble_range, EnsembleResult,
    ReadBench, SampleOutcome, VariationSpec,
};

/// Samples behind the power and delay orderings.
pub const ORDERING_SAMPLES: usize = 200;
/// Samples behind the error-count ordering.
pub const BER_SAMPLES: usize = 1000;
/// Samples per design and state in the timed sweep.
pub const SWEEP_SAMPLES: usize = 100;
pub const SWEEP_BUDGET: Duration = Duration::from_secs(600);

const STATES: [MtjState; 2] = [MtjState::P, MtjState::Ap];

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub criterion: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.pass { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {:2} {mark}: {}; {}",
            self.criterion, self.title, self.detail
        )
    }
}

fn verdict(criterion: u8, title: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict {
        criterion,
        title,
        pass,
        detail,
    }
}

fn failed(criterion: u8, title: &'static str, err: impl fmt::Display) -> Verdict {
    verdict(criterion, title, false, format!("error: {err}"))
}

fn designs() -> Vec<DesignId> {
    DesignId::all()
}

fn bench(id: DesignId, state: MtjState) -> mramsim::Result<ReadBench> {
    ReadBench::new(
        id,
        state,
        &SenseAmpParams::default(),
        &default_timing(),
        &SolverConfig::default(),
    )
}

fn circuit(text: &str) -> FlatCircuit {
    flatten_hierarchy(&parse_netlist(text).expect("fixed netlist parses"))
        .expect("fixed netlist flattens")
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Mean power, mean delay and error count over a prefix of an ensemble.
#[derive(Debug, Clone, Copy)]
struct Stats {
    power: f64,
    delay: f64,
    errors: usize,
}

fn stats(samples: &[SampleOutcome], state: MtjState) -> Stats {
    Stats {
        power: mean(samples.iter().filter_map(|s| s.power)),
        delay: mean(samples.iter().filter_map(|s| s.delay)),
        errors: samples
            .iter()
            .filter(|s| !s.decision.is_correct(state))
            .count(),
    }
}

/// Ensemble cache keyed by design and data state.
pub struct Campaign {
    seed: u64,
    ensembles: BTreeMap<String, EnsembleResult>,
}

impl Campaign {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ensembles: BTreeMap::new(),
        }
    }

    fn spec(&self, samples: usize) -> VariationSpec {
        VariationSpec::standard(self.seed, samples)
    }

    /// First `n` samples of `id` at `state`, simulating only those not yet
    /// cached and appending them with [`EnsembleResult::merge`].
    fn ensemble(
        &mut self,
        id: DesignId,
        state: MtjState,
        n: usize,
    ) -> mramsim::Result<&[SampleOutcome]> {
        let key = format!("{id} {state}");
        let have = self.ensembles.get(&key).map_or(0, |e| e.samples());
        if have < n {
            let b = bench(id, state)?;
            let more = run_ensemble_range(&b, &self.spec(n), have..n)?;
            let merged = match self.ensembles.remove(&key) {
                Some(head) => head.merge(more)?,
                None => more,
            };
            self.ensembles.insert(key.clone(), merged);
        }
        Ok(&self.ensembles[&key].per_sample[..n])
    }

    fn stats(&mut self, id: DesignId, state: MtjState, n: usize) -> mramsim::Result<Stats> {
        Ok(stats(self.ensemble(id, state, n)?, state))
    }

    fn stats_table(&mut self, n: usize) -> mramsim::Result<BTreeMap<(String, MtjState), Stats>> {
        let mut out = BTreeMap::new();
        for id in designs() {
            for state in STATES {
                out.insert((id.to_string(), state), self.stats(id, state, n)?);
            }
        }
        Ok(out)
    }

    /// Every criterion in order, passing each verdict to `report` as soon as
    /// it is known.
    pub fn run_all(&mut self, mut report: impl FnMut(&Verdict)) -> Vec<Verdict> {
        let checks: [&dyn Fn(&mut Self) -> Verdict; 11] = [
            &|_| solver_oracle(),
            &|_| variation_calibration(),
            &|_| nominal_correctness(),
            &|c| c.power_ordering(),
            &|c| c.delay_ordering(),
            &|c| c.error_ordering(),
            &|_| neutralization_efficacy(),
            &|_| initial_condition_independence(),
            &|_| read_disturbance(),
            &|_| precharge_power_model(),
            &|c| c.determinism_and_sweep(),
        ];
        checks
            .iter()
            .map(|check| {
                let v = check(self);
                report(&v);
                v
            })
            .collect()
    }

    pub fn power_ordering(&mut self) -> Verdict {
        const TITLE: &str = "power ordering C < V <= NV, V-single vs V-multi within 5%";
        let table = match self.stats_table(ORDERING_SAMPLES) {
            Ok(t) => t,
            Err(e) => return failed(4, TITLE, e),
        };
        let p = |id: &str, s| table[&(id.to_string(), s)].power * 1e6;
        let mut pass = true;
        let mut parts = Vec::new();
        for s in STATES {
            let csa = p("csa-1ref", s);
            let v = [p("vsa-1ref", s), p("vsa-3s", s)];
            let nv = [p("nvsa-1ref", s), p("nvsa-3s", s)];
            let c_lowest = v.iter().chain(&nv).all(|&x| csa < x);
            let v_le_nv = v[0] <= nv[0] && v[1] <= nv[1];
            let v_close = (v[0] / v[1] - 1.0).abs() <= 0.05;
            pass &= c_lowest && v_le_nv && v_close;
            parts.push(format!(
                "{s}: C {csa:.2}, V {:.2}/{:.2}, NV {:.2}/{:.2} uW (C lowest {c_lowest}, V<=NV {v_le_nv}, V pair within 5% {v_close})",
                v[0], v[1], nv[0], nv[1]
            ));
        }
        verdict(4, TITLE, pass, parts.join("; "))
    }

    pub fn delay_ordering(&mut self) -> Verdict {
        const TITLE: &str =
            "delay ordering V-multi fastest, NV pair within 5% and faster than V-single and C";
        let table = match self.stats_table(ORDERING_SAMPLES) {
            Ok(t) => t,
            Err(e) => return failed(5, TITLE, e),
        };
        let d = |id: &str, s| table[&(id.to_string(), s)].delay * 1e12;
        let mut pass = true;
        let mut parts = Vec::new();
        for s in STATES {
            let (c, v1, v3, nv1, nv3) = (
                d("csa-1ref", s),
                d("vsa-1ref", s),
                d("vsa-3s", s),
                d("nvsa-1ref", s),
                d("nvsa-3s", s),
            );
            let v3_fastest = [c, v1, nv1, nv3].iter().all(|&x| v3 < x);
            let nv_close = (nv1 / nv3 - 1.0).abs() <= 0.05;
            let nv_faster = [nv1, nv3].iter().all(|&x| x < v1 && x < c);
            pass &= v3_fastest && nv_close && nv_faster;
            parts.push(format!(
                "{s}: C {c:.1}, V {v1:.1}/{v3:.1}, NV {nv1:.1}/{nv3:.1} ps (V-multi fastest {v3_fastest}, NV pair within 5% {nv_close}, NV faster {nv_faster})"
            ));
        }
        verdict(5, TITLE, pass, parts.join("; "))
    }

    pub fn error_ordering(&mut self) -> Verdict {
        const TITLE: &str =
            "error counts at 1000 samples, C above every voltage design, NV-single <= V-single";
        let mut errors = BTreeMap::new();
        for id in designs() {
            match self.stats(id, MtjState::P, BER_SAMPLES) {
                Ok(s) => errors.insert(id.to_string(), s.errors),
                Err(e) => return failed(6, TITLE, e),
            };
        }
        let csa = errors["csa-1ref"];
        let c_worst = errors
            .iter()
            .filter(|(k, _)| *k != "csa-1ref")
            .all(|(_, &e)| csa > e);
        let nv_le_v = errors["nvsa-1ref"] <= errors["vsa-1ref"];
        let listing: Vec<String> = DesignId::ALL
            .iter()
            .map(|k| format!("{k} {}", errors[*k]))
            .collect();
        verdict(
            6,
            TITLE,
            c_worst && nv_le_v,
            format!(
                "P errors: {} (C worst {c_worst}, NV<=V {nv_le_v})",
                listing.join(", ")
            ),
        )
    }

    pub fn determinism_and_sweep(&mut self) -> Verdict {
        const TITLE: &str = "split-and-merge equals a single run, full sweep under 10 minutes";
        let id: DesignId = "csa-1ref".parse().expect("built-in design");
        // the cached ensemble was assembled from separately simulated ranges
        let split = match self.ensemble(id, MtjState::P, BER_SAMPLES) {
            Ok(s) => s.to_vec(),
            Err(e) => return failed(11, TITLE, e),
        };
        let single =
            match bench(id, MtjState::P).and_then(|b| run_ensemble(&b, &self.spec(BER_SAMPLES))) {
                Ok(r) => r.per_sample,
                Err(e) => return failed(11, TITLE, e),
            };
        let identical = split == single;

        let start = Instant::now();
        let mut sweep_failures = 0;
        for id in designs() {
            for state in STATES {
                match bench(id, state).and_then(|b| run_ensemble(&b, &self.spec(SWEEP_SAMPLES))) {
                    Ok(r) => sweep_failures += r.failures,
                    Err(e) => return failed(11, TITLE, e),
                }
            }
        }
        let elapsed = start.elapsed();
        let fast = elapsed < SWEEP_BUDGET;
        verdict(
            11,
            TITLE,
            identical && fast,
            format!(
                "{BER_SAMPLES} samples merged from 0..{ORDERING_SAMPLES} and {ORDERING_SAMPLES}..{BER_SAMPLES} identical {identical}; \
                 sweep 5x2x{SWEEP_SAMPLES} took {:.1} s on {} thread(s), {sweep_failures} solver failures",
                elapsed.as_secs_f64(),
                cpu_count()
            ),
        )
    }
}

fn cpu_count() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Max RC discharge error normalized to the initial voltage.
fn rc_error(dt: f64) -> mramsim::Result<f64> {
    let c = circuit("R1 a 0 1k\nC1 a 0 50f ic=1\n");
    let cfg = SolverConfig {
        dt,
        t_stop: 500e-12,
        ..SolverConfig::default()
    };
    let tr = transient_analysis(&c, &cfg, &BTreeMap::new())?;
    let tau = 1e3 * 50e-15;
    let v = tr.node("a").expect("node a exists");
    Ok(tr
        .times
        .iter()
        .zip(v)
        .map(|(t, v)| (v - (-t / tau).exp()).abs())
        .fold(0.0, f64::max))
}

pub fn solver_oracle() -> Verdict {
    const TITLE: &str = "RC discharge within 0.5% at 1 ps, first-order convergence, under 1 s";
    let start = Instant::now();
    let (e1, e2) = match (rc_error(1e-12), rc_error(0.5e-12)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return failed(1, TITLE, e),
    };
    let elapsed = start.elapsed();
    let ratio = e1 / e2;
    let pass = e1 < 0.005 && (1.8..=2.2).contains(&ratio) && elapsed < Duration::from_secs(1);
    verdict(
        1,
        TITLE,
        pass,
        format!(
            "max error {:.3}% at 1 ps, {:.3}% at 0.5 ps, ratio {ratio:.3}, {:.0} ms",
            e1 * 100.0,
            e2 * 100.0,
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

pub fn variation_calibration() -> Verdict {
    const TITLE: &str = "calibrated 3-sigma resistance spread 13% +/- 1% in both states over 1e5 samples, under 10 s";
    let start = Instant::now();
    let mut p = MtjParams::default();
    p.beta = match calibrate_beta(0.02, 0.13, p.tox0) {
        Ok(b) => b,
        Err(e) => return failed(2, TITLE, e),
    };
    let spec = VariationSpec {
        sigma_tox_rel: 0.02 / 3.0,
        ..VariationSpec::standard(1, 100_000)
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for s in STATES {
        let r = resistance_samples(&spec, &p, s);
        let m = mean(r.iter().copied());
        let sd = (r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
        let spread = 3.0 * sd / m;
        pass &= (spread - 0.13).abs() <= 0.01;
        parts.push(format!("{s} {:.2}%", spread * 100.0));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    verdict(
        2,
        TITLE,
        pass,
        format!(
            "beta {:.3}/nm, spreads {}, {:.2} s",
            p.beta * 1e-9,
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

pub fn nominal_correctness() -> Verdict {
    const TITLE: &str = "all designs read both states correctly at zero variance";
    let mut correct = 0;
    let mut wrong = Vec::new();
    for id in designs() {
        for s in STATES {
            match bench(id, s).and_then(|b| b.read_nominal()) {
                Ok(m) if m.decision.is_correct(s) => correct += 1,
                Ok(m) => wrong.push(format!("{id} {s} read {}", m.decision)),
                Err(e) => wrong.push(format!("{id} {s} error {e}")),
            }
        }
    }
    let detail = if wrong.is_empty() {
        format!("{correct}/10 correct")
    } else {
        format!("{correct}/10 correct; {}", wrong.join(", "))
    };
    verdict(3, TITLE, correct == 10, detail)
}

/// Gate disturbance and balance residual of one design at one state.
fn clamp_figures(id: DesignId, state: MtjState, c_neutral: f64) -> mramsim::Result<(f64, f64)> {
    let b = bench(id, state)?;
    let tr = b.transient(&b.circuit, &BTreeMap::new())?;
    let g = gate_disturbance(&tr, &b.timing).map_err(mramsim::Error::from)?;
    let t = b.timing.decision_time();
    let a = tr.sample(tr.node(NODE_SAOUT).expect("output node"), t);
    let bb = tr.sample(tr.node(NODE_SAOUTB).expect("output node"), t);
    let cgd = SenseAmpParams::default().clamp_cgd();
    let bal = neutralization_balance(
        a,
        bb,
        b.timing.vc,
        b.timing.vr,
        cgd,
        cgd,
        c_neutral,
        c_neutral,
    )
    .map_err(|e| mramsim::Error::Invalid(e.to_string()))?;
    Ok((g.differential, bal.residual()))
}

pub fn neutralization_efficacy() -> Verdict {
    const TITLE: &str = "neutralization cuts clamp-gate disturbance and balance residual by >= 2x";
    let c_match = SenseAmpParams::default().neutral_cap_value();
    let mut pass = true;
    let mut parts = Vec::new();
    for (plain, neutral) in [("vsa-1ref", "nvsa-1ref"), ("vsa-3s", "nvsa-3s")] {
        for s in STATES {
            let with = clamp_figures(neutral.parse().expect("built-in"), s, c_match);
            let without = clamp_figures(plain.parse().expect("built-in"), s, 0.0);
            let ((dw, rw), (dn, rn)) = match (with, without) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return failed(7, TITLE, e),
            };
            let ok = dn >= 2.0 * dw && rn >= 2.0 * rw;
            pass &= ok;
            parts.push(format!(
                "{neutral} {s}: disturbance {:.1} vs {:.1} mV ({:.1}x), residual {rw:.3} vs {rn:.3} ({:.1}x)",
                dw * 1e3,
                dn * 1e3,
                dn / dw,
                rn / rw
            ));
        }
    }
    verdict(7, TITLE, pass, parts.join("; "))
}

pub fn initial_condition_independence() -> Verdict {
    const TITLE: &str = "neutralized design decides the same from all four output presets";
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["nvsa-1ref", "nvsa-3s"] {
        for s in STATES {
            let b = match bench(name.parse().expect("built-in"), s) {
                Ok(b) => b,
                Err(e) => return failed(8, TITLE, e),
            };
            let vdd = b.timing.vdd;
            let mut decisions = Vec::new();
            for (x, y) in [(0.0, 0.0), (0.0, vdd), (vdd, 0.0), (vdd, vdd)] {
                let init =
                    BTreeMap::from([(NODE_SAOUT.to_string(), x), (NODE_SAOUTB.to_string(), y)]);
                let d = b
                    .transient(&b.circuit, &init)
                    .and_then(|tr| Ok(extract_decision(&tr, &b.timing)?));
                match d {
                    Ok(d) => decisions.push(d),
                    Err(e) => return failed(8, TITLE, e),
                }
            }
            let same = decisions.iter().all(|&d| d == decisions[0]);
            pass &= same;
            let shown: Vec<String> = decisions.iter().map(Decision::to_string).collect();
            parts.push(format!("{name} {s}: {}", shown.join("/")));
        }
    }
    verdict(8, TITLE, pass, parts.join("; "))
}

pub fn read_disturbance() -> Verdict {
    const TITLE: &str =
        "read current below 20% of critical current, stacked reference I_C exactly 3x";
    let mut worst: Option<(String, f64)> = None;
    let mut all_pass = true;
    let mut ratio_exact = true;
    for id in designs() {
        for s in STATES {
            let b = match bench(id, s) {
                Ok(b) => b,
                Err(e) => return failed(9, TITLE, e),
            };
            let tr = match b.transient(&b.circuit, &BTreeMap::new()) {
                Ok(tr) => tr,
                Err(e) => return failed(9, TITLE, e),
            };
            let cells = cell_currents(&tr, &b.circuit);
            let data_ic = cells
                .iter()
                .find(|c| c.name.eq_ignore_ascii_case(DATA_MTJ))
                .map(|c| c.i_c)
                .expect("every design has a data cell");
            let stacked = !id.reference.is_single();
            for c in &cells {
                let is_data = c.name.eq_ignore_ascii_case(DATA_MTJ);
                if !(is_data || stacked) {
                    continue;
                }
                if !is_data {
                    ratio_exact &= c.i_c == 3.0 * data_ic;
                }
                all_pass &= c.passes();
                let frac = c.i_peak / c.i_c;
                if worst.as_ref().is_none_or(|(_, w)| frac > *w) {
                    worst = Some((format!("{id} {s} {}", c.name), frac));
                }
            }
        }
    }
    let (where_, frac) = worst.expect("at least one cell");
    verdict(
        9,
        TITLE,
        all_pass && ratio_exact,
        format!(
            "worst I_RD/I_C {:.1}% at {where_} (limit 20%), stacked I_C ratio 3.00 exact {ratio_exact}",
            frac * 100.0
        ),
    )
}

/// Integrated and modelled power of one pre-charge of discharged BL and REFL
/// through 500 nm pMOS switches.
pub fn precharge_power(params: &SenseAmpParams) -> mramsim::Result<(f64, f64)> {
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
    let tr = transient_analysis(&circuit(&text), &cfg, &BTreeMap::new())?;
    let integrated = extract_power_integrated(&tr, 1.0, READ_FREQUENCY);
    let model = power_dynamic_model(&PowerModel {
        activity: 1.0,
        c_total: params.c_bl + params.c_refl,
        v_swing: 1.0,
        vdd: 1.0,
        f: READ_FREQUENCY,
    });
    Ok((integrated, model))
}

pub fn precharge_power_model() -> Verdict {
    const TITLE: &str =
        "integrated pre-charge power of C_BL + C_REFL within 5% of the charge model";
    match precharge_power(&SenseAmpParams::default()) {
        Ok((integrated, model)) => {
            let rel = integrated / model - 1.0;
            verdict(
                10,
                TITLE,
                rel.abs() <= 0.05,
                format!(
                    "integrated {:.3} uW, model {:.3} uW, deviation {:+.2}%",
                    integrated * 1e6,
                    model * 1e6,
                    rel * 100.0
                ),
            )
        }
        Err(e) => failed(10, TITLE, e),
    }
}
