use std::collections::BTreeMap;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_draw, draw_sample, VariationError, VariationSpec};
use crate::devices::MtjState;
use crate::metrics::{extract_readout, Decision, ReadoutMetrics};
use crate::netlist::{flatten_hierarchy, FlatCircuit};
use crate::senseamps::{build_design, DesignId, SenseAmpParams, TimingPlan};
use crate::solver::{transient_analysis, SolverConfig, TransientResult};
use crate::{Error, Result};

/// One built-in design, flattened once and ready to be read repeatedly.
#[derive(Debug, Clone)]
pub struct ReadBench {
    pub id: DesignId,
    pub state: MtjState,
    pub circuit: FlatCircuit,
    pub timing: TimingPlan,
    pub cfg: SolverConfig,
}

impl ReadBench {
    pub fn new(
        id: DesignId,
        state: MtjState,
        params: &SenseAmpParams,
        timing: &TimingPlan,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if cfg.t_stop < timing.decision_time() {
            return Err(Error::Invalid(format!(
                "t_stop {:e} s ends before the decision instant {:e} s",
                cfg.t_stop,
                timing.decision_time()
            )));
        }
        let netlist = build_design(id.kind, id.reference, params, state, timing)?;
        Ok(Self {
            id,
            state,
            circuit: flatten_hierarchy(&netlist)?,
            timing: timing.clone(),
            cfg: cfg.clone(),
        })
    }

    pub fn transient(
        &self,
        circuit: &FlatCircuit,
        initial: &BTreeMap<String, f64>,
    ) -> Result<TransientResult> {
        Ok(transient_analysis(circuit, &self.cfg, initial)?)
    }

    /// Simulates `circuit` (this bench's circuit or a varied copy) and
    /// extracts the readout figures.
    pub fn read(&self, circuit: &FlatCircuit) -> Result<ReadoutMetrics> {
        let tr = self.transient(circuit, &BTreeMap::new())?;
        Ok(extract_readout(&tr, circuit, &self.timing)?)
    }

    pub fn read_nominal(&self) -> Result<ReadoutMetrics> {
        self.read(&self.circuit)
    }

    /// Reads sample `index` of `spec`; a solver failure yields an
    /// indeterminate, non-converged outcome.
    pub fn sample(&self, spec: &VariationSpec, index: usize) -> Result<SampleOutcome> {
        let draw = draw_sample(spec, index, &self.circuit)?;
        let varied = apply_draw(&self.circuit, &draw);
        Ok(match self.read(&varied) {
            Ok(m) => SampleOutcome {
                index,
                decision: m.decision,
                delay: m.delay,
                power: Some(m.power_avg),
                sense_margin: Some(m.sense_margin),
                converged: true,
            },
            Err(e) => {
                log::warn!("{} {} sample {index}: {e}", self.id, self.state);
                SampleOutcome {
                    index,
                    decision: Decision::Indeterminate,
                    delay: None,
                    power: None,
                    sense_margin: None,
                    converged: false,
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub decision: Decision,
    pub delay: Option<f64>,
    pub power: Option<f64>,
    pub sense_margin: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub design_id: String,
    pub data_state: MtjState,
    pub seed: u64,
    /// Ordered by sample index.
    pub per_sample: Vec<SampleOutcome>,
    /// Samples whose decision differs from the stored state, indeterminate included.
    pub error_count: usize,
    /// Samples where the solver failed.
    pub failures: usize,
}

impl EnsembleResult {
    fn from_samples(bench: &ReadBench, seed: u64, per_sample: Vec<SampleOutcome>) -> Self {
        let error_count = per_sample
            .iter()
            .filter(|s| !s.decision.is_correct(bench.state))
            .count();
        let failures = per_sample.iter().filter(|s| !s.converged).count();
        Self {
            design_id: bench.id.to_string(),
            data_state: bench.state,
            seed,
            per_sample,
            error_count,
            failures,
        }
    }

    pub fn samples(&self) -> usize {
        self.per_sample.len()
    }

    /// Appends a run that continues this one's index range.
    pub fn merge(mut self, other: EnsembleResult) -> std::result::Result<Self, VariationError> {
        let next = self.per_sample.last().map_or(0, |s| s.index + 1);
        let contiguous = other.per_sample.first().is_none_or(|s| s.index == next);
        if self.design_id != other.design_id
            || self.data_state != other.data_state
            || self.seed != other.seed
            || !contiguous
        {
            return Err(VariationError::Incompatible(
                format!("{} {} seed {}", self.design_id, self.data_state, self.seed),
                format!(
                    "{} {} seed {}",
                    other.design_id, other.data_state, other.seed
                ),
            ));
        }
        self.error_count += other.error_count;
        self.failures += other.failures;
        self.per_sample.extend(other.per_sample);
        Ok(self)
    }
}

/// Samples `range` of `spec` in parallel on the current rayon pool.
pub fn run_ensemble_range(
    bench: &ReadBench,
    spec: &VariationSpec,
    range: Range<usize>,
) -> Result<EnsembleResult> {
    spec.validate()?;
    if range.end > spec.samples {
        return Err(VariationError::IndexOutOfRange {
            index: range.end - 1,
            samples: spec.samples,
        }
        .into());
    }
    let per_sample = range
        .into_par_iter()
        .map(|i| bench.sample(spec, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleResult::from_samples(bench, spec.seed, per_sample))
}

pub fn run_ensemble(bench: &ReadBench, spec: &VariationSpec) -> Result<EnsembleResult> {
    run_ensemble_range(bench, spec, 0..spec.samples)
}
