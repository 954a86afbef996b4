//! `mramsim`: read-path simulations and Monte Carlo runs of the built-in sense
//! amplifiers, or transient runs of user netlists.

mod histogram;
mod report;
mod write;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mramsim::devices::{MtjParams, MtjState};
use mramsim::metrics::{
    extract_decision, extract_power_integrated, extract_readout, extract_readout_delay,
    sense_margin, READ_FREQUENCY,
};
use mramsim::netlist::units::parse_value;
use mramsim::netlist::{flatten_hierarchy, parse_netlist, FlatCircuit};
use mramsim::senseamps::{default_timing, DesignId, SenseAmpParams, TimingPlan};
use mramsim::solver::{transient_analysis, SolverConfig, TransientResult};
use mramsim::variation::{resistance_samples, run_ensemble, ReadBench, VariationSpec};

use report::{RunReport, SweepRow};

/// Exit code for malformed arguments or unusable input.
const EXIT_USAGE: u8 = 2;
/// Exit code for solver failures.
const EXIT_NUMERICAL: u8 = 3;
/// Fraction of non-converged Monte Carlo samples that fails a run.
const MAX_FAILURE_FRACTION: f64 = 0.10;

#[derive(Debug, Parser)]
#[command(
    name = "mramsim",
    version,
    about = "STT-MRAM sense-amplifier transient and Monte Carlo simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One nominal transient of a built-in design or a netlist file.
    Simulate(SimulateArgs),
    /// Monte Carlo ensemble of one design and data state.
    Montecarlo(MonteCarloArgs),
    /// Every built-in design in both data states.
    Sweep(SweepArgs),
    /// SVG histogram of a per-sample quantity.
    Histogram(HistogramArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Time step in seconds; SPICE suffixes such as `500f` are accepted.
    #[arg(long, value_parser = seconds)]
    dt: Option<f64>,
    /// End of the transient in seconds; SPICE suffixes accepted.
    #[arg(long, value_parser = seconds)]
    tstop: Option<f64>,
}

fn seconds(s: &str) -> Result<f64, String> {
    parse_value(s).ok_or_else(|| format!("`{s}` is not a number"))
}

impl SolverArgs {
    fn config(&self, tran: Option<(f64, f64)>) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some((step, stop)) = tran {
            cfg.dt = step;
            cfg.t_stop = stop;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(t) = self.tstop {
            cfg.t_stop = t;
        }
        cfg
    }
}

#[derive(Debug, Args)]
struct VariationArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// One-sigma relative oxide-thickness spread.
    #[arg(long, default_value_t = 0.02 / 3.0)]
    sigma_tox_rel: f64,
    /// One-sigma threshold-voltage spread in volts.
    #[arg(long, default_value_t = 0.01)]
    sigma_vth: f64,
}

impl VariationArgs {
    fn spec(&self) -> Result<VariationSpec, Failure> {
        let spec = VariationSpec {
            sigma_tox_rel: self.sigma_tox_rel,
            sigma_vth: self.sigma_vth,
            seed: self.seed,
            samples: self.samples,
        };
        spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "netlist", required_unless_present = "netlist")]
    design: Option<String>,
    #[arg(long)]
    netlist: Option<PathBuf>,
    #[arg(long, default_value = "P")]
    state: String,
    /// Write every node voltage as CSV with a `t,<node>...` header.
    #[arg(long)]
    dump_waves: Option<PathBuf>,
    /// Also write the report to `<out>.csv` / `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[arg(long)]
    design: String,
    #[arg(long, default_value = "P")]
    state: String,
    #[command(flatten)]
    variation: VariationArgs,
    /// Output stem; writes `<out>.csv` and/or `<out>.json`.
    #[arg(long, default_value = "montecarlo")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    variation: VariationArgs,
    /// Also write the table to `<out>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Quantity {
    Resistance,
    Margin,
    Delay,
    Power,
}

#[derive(Debug, Args)]
struct HistogramArgs {
    /// Per-sample CSV written by `montecarlo`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "margin")]
    quantity: Quantity,
    /// Design to sample when no input file is given.
    #[arg(long, default_value = "nvsa-1ref")]
    design: String,
    #[arg(long, default_value = "P")]
    state: String,
    #[command(flatten)]
    variation: VariationArgs,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    #[arg(long, default_value = "histogram.svg")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<mramsim::Error> for Failure {
    fn from(e: mramsim::Error) -> Self {
        match e {
            mramsim::Error::Solver(e) => Failure::Numerical(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Montecarlo(a) => montecarlo(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Histogram(a) => histogram_cmd(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// `MRAMSIM_THREADS` caps the Monte Carlo worker pool.
fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MRAMSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MRAMSIM_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn parse_design(s: &str) -> Result<DesignId, Failure> {
    s.parse()
        .map_err(|e: mramsim::senseamps::DesignError| Failure::Usage(e.to_string()))
}

fn parse_state(s: &str) -> Result<MtjState, Failure> {
    s.parse().map_err(Failure::Usage)
}

fn bench(design: &str, state: &str, solver: &SolverArgs) -> Result<ReadBench, Failure> {
    let id = parse_design(design)?;
    let state = parse_state(state)?;
    let cfg = solver.config(None);
    Ok(ReadBench::new(
        id,
        state,
        &SenseAmpParams::default(),
        &default_timing(),
        &cfg,
    )?)
}

fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let timing = default_timing();
    let state = parse_state(&a.state)?;
    let (label, circuit, cfg) = match (&a.design, &a.netlist) {
        (Some(d), _) => {
            let b = bench(d, &a.state, &a.solver)?;
            (b.id.to_string(), b.circuit, b.cfg)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let netlist = parse_netlist(&text).map_err(|e| Failure::Usage(e.to_string()))?;
            let circuit = flatten_hierarchy(&netlist).map_err(|e| Failure::Usage(e.to_string()))?;
            let cfg = a.solver.config(circuit.tran);
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            (path.display().to_string(), circuit, cfg)
        }
        (None, None) => {
            return Err(Failure::Usage(
                "either --design or --netlist is required".into(),
            ))
        }
    };
    let tr = transient_analysis(&circuit, &cfg, &BTreeMap::new())
        .map_err(|e| Failure::Numerical(e.to_string()))?;
    if let Some(path) = &a.dump_waves {
        write::atomic(path, report::waveform_csv(&tr)?.as_bytes())?;
    }
    let report = if a.design.is_some() {
        let m = extract_readout(&tr, &circuit, &timing)
            .map_err(|e| Failure::Numerical(e.to_string()))?;
        RunReport::single(&label, state, &m)
    } else {
        netlist_report(&label, state, &tr, &circuit, &timing)
    };
    print!("{}", report.describe());
    if let Some(stem) = &a.out {
        report.write(stem, a.format.csv(), a.format.json())?;
    }
    Ok(())
}

/// Figures for a user netlist, filled in where its node names allow.
fn netlist_report(
    label: &str,
    state: MtjState,
    tr: &TransientResult,
    circuit: &FlatCircuit,
    timing: &TimingPlan,
) -> RunReport {
    let covered = tr
        .times
        .last()
        .is_some_and(|&t| t >= timing.decision_time());
    let decision = covered.then(|| extract_decision(tr, timing).ok()).flatten();
    let delay = covered
        .then(|| extract_readout_delay(tr, timing).ok())
        .flatten();
    let margin = sense_margin(tr, timing).ok();
    let power = circuit
        .source_names()
        .iter()
        .any(|s| s.eq_ignore_ascii_case("vdd"))
        .then(|| extract_power_integrated(tr, timing.vdd, READ_FREQUENCY));
    RunReport::partial(label, state, decision, delay, power, margin)
}

fn montecarlo(a: &MonteCarloArgs) -> Result<(), Failure> {
    let spec = a.variation.spec()?;
    let b = bench(&a.design, &a.state, &a.solver)?;
    let result = run_ensemble(&b, &spec)?;
    let report = RunReport::ensemble(&result, &spec);
    report.write(&a.out, a.format.csv(), a.format.json())?;
    println!(
        "{} {}: {} errors in {} samples ({} solver failures)",
        result.design_id,
        result.data_state,
        result.error_count,
        result.samples(),
        result.failures
    );
    if result.failures as f64 > MAX_FAILURE_FRACTION * result.samples() as f64 {
        return Err(Failure::Numerical(format!(
            "{} of {} samples did not converge",
            result.failures,
            result.samples()
        )));
    }
    Ok(())
}

fn sweep(a: &SweepArgs) -> Result<(), Failure> {
    let spec = a.variation.spec()?;
    let cfg = a.solver.config(None);
    let mut rows = Vec::new();
    for id in DesignId::all() {
        for state in [MtjState::P, MtjState::Ap] {
            let outcome = ReadBench::new(
                id,
                state,
                &SenseAmpParams::default(),
                &default_timing(),
                &cfg,
            )
            .and_then(|b| run_ensemble(&b, &spec));
            let row = match outcome {
                Ok(r) if r.failures as f64 <= MAX_FAILURE_FRACTION * r.samples() as f64 => {
                    SweepRow::from_ensemble(&r)
                }
                Ok(r) => {
                    log::warn!(
                        "{id} {state}: {} of {} samples did not converge",
                        r.failures,
                        r.samples()
                    );
                    SweepRow::failed(id, state)
                }
                Err(e) => {
                    log::warn!("{id} {state}: {e}");
                    SweepRow::failed(id, state)
                }
            };
            rows.push(row);
        }
    }
    print!("{}", report::sweep_table(&rows));
    if let Some(stem) = &a.out {
        write::atomic(
            &stem_path(stem, "csv"),
            report::sweep_csv(&rows)?.as_bytes(),
        )?;
    }
    Ok(())
}

fn histogram_cmd(a: &HistogramArgs) -> Result<(), Failure> {
    let (values, label) = match &a.input {
        Some(path) => report::read_column(path, a.quantity)?,
        None => sample_quantity(a)?,
    };
    if values.is_empty() {
        return Err(Failure::Usage("no values to plot".into()));
    }
    if a.bins == 0 {
        return Err(Failure::Usage("--bins must be at least 1".into()));
    }
    let svg = histogram::render(&values, a.bins, &label);
    write::atomic(&a.out, svg.as_bytes())?;
    println!("{} samples -> {}", values.len(), a.out.display());
    Ok(())
}

fn sample_quantity(a: &HistogramArgs) -> Result<(Vec<f64>, String), Failure> {
    let spec = a.variation.spec()?;
    let state = parse_state(&a.state)?;
    if let Quantity::Resistance = a.quantity {
        let r = resistance_samples(&spec, &MtjParams::default(), state);
        return Ok((r, format!("{state} resistance (Ω)")));
    }
    let b = bench(&a.design, &a.state, &a.solver)?;
    let result = run_ensemble(&b, &spec)?;
    let pick = |s: &mramsim::variation::SampleOutcome| match a.quantity {
        Quantity::Margin => s.sense_margin.map(|v| v * 1e3),
        Quantity::Delay => s.delay.map(|v| v * 1e12),
        Quantity::Power => s.power.map(|v| v * 1e6),
        Quantity::Resistance => unreachable!(),
    };
    let values = result.per_sample.iter().filter_map(pick).collect();
    Ok((
        values,
        format!(
            "{} {} {}",
            result.design_id,
            state,
            quantity_label(a.quantity)
        ),
    ))
}

fn quantity_label(q: Quantity) -> &'static str {
    match q {
        Quantity::Resistance => "resistance (Ω)",
        Quantity::Margin => "sense margin (mV)",
        Quantity::Delay => "readout delay (ps)",
        Quantity::Power => "power (µW)",
    }
}

/// `<stem>.<ext>`, keeping any dots already in the stem.
pub(crate) fn stem_path(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
