//! Report schemas: per-sample CSV rows, JSON summaries and the sweep table.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use mramsim::devices::MtjState;
use mramsim::metrics::{Decision, ReadoutMetrics};
use mramsim::senseamps::DesignId;
use mramsim::solver::TransientResult;
use mramsim::variation::{EnsembleResult, SampleOutcome, VariationSpec};

use crate::{stem_path, write, Failure, Quantity};

/// One per-sample CSV row, in report units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub index: usize,
    pub decision: String,
    pub correct: bool,
    pub delay_ps: Option<f64>,
    pub power_uw: Option<f64>,
    pub sense_margin_mv: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation, absent below two values.
    pub std: Option<f64>,
}

impl Stat {
    pub fn of(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.collect();
        let n = v.len();
        if n == 0 {
            return Self {
                n,
                mean: None,
                std: None,
            };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let std = (n > 1)
            .then(|| (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
        Self {
            n,
            mean: Some(mean),
            std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub delay_ps: Stat,
    pub power_uw: Stat,
    pub sense_margin_mv: Stat,
}

impl Summary {
    pub fn of(rows: &[Row]) -> Self {
        Self {
            delay_ps: Stat::of(rows.iter().filter_map(|r| r.delay_ps)),
            power_uw: Stat::of(rows.iter().filter_map(|r| r.power_uw)),
            sense_margin_mv: Stat::of(rows.iter().filter_map(|r| r.sense_margin_mv)),
        }
    }
}

/// JSON summary plus the rows it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub design_id: String,
    pub data_state: String,
    pub seed: Option<u64>,
    pub samples: usize,
    pub sigma_tox_rel: Option<f64>,
    pub sigma_vth: Option<f64>,
    pub summary: Summary,
    pub error_count: usize,
    pub failures: usize,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

fn decision_row(index: usize, state: MtjState, decision: Option<Decision>) -> Row {
    Row {
        index,
        decision: decision.map_or_else(|| "n/a".to_string(), |d| d.to_string()),
        correct: decision.is_some_and(|d| d.is_correct(state)),
        delay_ps: None,
        power_uw: None,
        sense_margin_mv: None,
        converged: true,
    }
}

impl RunReport {
    fn from_rows(
        design_id: &str,
        state: MtjState,
        rows: Vec<Row>,
        spec: Option<&VariationSpec>,
    ) -> Self {
        let error_count = rows.iter().filter(|r| !r.correct).count();
        let failures = rows.iter().filter(|r| !r.converged).count();
        Self {
            design_id: design_id.to_string(),
            data_state: state.to_string(),
            seed: spec.map(|s| s.seed),
            samples: rows.len(),
            sigma_tox_rel: spec.map(|s| s.sigma_tox_rel),
            sigma_vth: spec.map(|s| s.sigma_vth),
            summary: Summary::of(&rows),
            error_count,
            failures,
            rows,
        }
    }

    pub fn single(design_id: &str, state: MtjState, m: &ReadoutMetrics) -> Self {
        let row = Row {
            delay_ps: m.delay.map(|d| d * 1e12),
            power_uw: Some(m.power_avg * 1e6),
            sense_margin_mv: Some(m.sense_margin * 1e3),
            ..decision_row(0, state, Some(m.decision))
        };
        Self::from_rows(design_id, state, vec![row], None)
    }

    pub fn partial(
        label: &str,
        state: MtjState,
        decision: Option<Decision>,
        delay: Option<f64>,
        power: Option<f64>,
        margin: Option<f64>,
    ) -> Self {
        let row = Row {
            delay_ps: delay.map(|d| d * 1e12),
            power_uw: power.map(|p| p * 1e6),
            sense_margin_mv: margin.map(|m| m * 1e3),
            ..decision_row(0, state, decision)
        };
        Self::from_rows(label, state, vec![row], None)
    }

    pub fn ensemble(r: &EnsembleResult, spec: &VariationSpec) -> Self {
        let rows = r
            .per_sample
            .iter()
            .map(|s| sample_row(s, r.data_state))
            .collect();
        Self::from_rows(&r.design_id, r.data_state, rows, Some(spec))
    }

    /// Human-readable summary for the terminal.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "design:       {}", self.design_id);
        let _ = writeln!(s, "data state:   {}", self.data_state);
        if self.rows.len() == 1 {
            let r = &self.rows[0];
            let _ = writeln!(s, "decision:     {}", r.decision);
            let _ = writeln!(s, "delay:        {}", fmt_opt(r.delay_ps, "ps"));
            let _ = writeln!(s, "power:        {}", fmt_opt(r.power_uw, "µW"));
            let _ = writeln!(s, "sense margin: {}", fmt_opt(r.sense_margin_mv, "mV"));
        } else {
            let _ = writeln!(s, "samples:      {}", self.samples);
            let _ = writeln!(s, "errors:       {}", self.error_count);
            let _ = writeln!(
                s,
                "delay:        {}",
                fmt_stat(&self.summary.delay_ps, "ps")
            );
            let _ = writeln!(
                s,
                "power:        {}",
                fmt_stat(&self.summary.power_uw, "µW")
            );
            let _ = writeln!(
                s,
                "sense margin: {}",
                fmt_stat(&self.summary.sense_margin_mv, "mV")
            );
        }
        s
    }

    pub fn csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        if self.rows.is_empty() {
            w.write_record(ROW_HEADER)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn write(&self, stem: &Path, csv: bool, json: bool) -> Result<(), Failure> {
        if csv {
            write::atomic(&stem_path(stem, "csv"), self.csv()?.as_bytes())?;
        }
        if json {
            let mut text = serde_json::to_string_pretty(self).context("serializing report")?;
            text.push('\n');
            write::atomic(&stem_path(stem, "json"), text.as_bytes())?;
        }
        Ok(())
    }
}

const ROW_HEADER: [&str; 7] = [
    "index",
    "decision",
    "correct",
    "delay_ps",
    "power_uw",
    "sense_margin_mv",
    "converged",
];

fn sample_row(s: &SampleOutcome, state: MtjState) -> Row {
    Row {
        delay_ps: s.delay.map(|d| d * 1e12),
        power_uw: s.power.map(|p| p * 1e6),
        sense_margin_mv: s.sense_margin.map(|m| m * 1e3),
        converged: s.converged,
        ..decision_row(s.index, state, Some(s.decision))
    }
}

fn fmt_opt(v: Option<f64>, unit: &str) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2} {unit}"))
}

fn fmt_stat(s: &Stat, unit: &str) -> String {
    match (s.mean, s.std) {
        (Some(m), Some(sd)) => format!("{m:.2} ± {sd:.2} {unit} (n = {})", s.n),
        (Some(m), None) => format!("{m:.2} {unit} (n = {})", s.n),
        _ => "n/a".to_string(),
    }
}

/// Node voltages with a `t,<node>...` header; ground is omitted.
pub fn waveform_csv(tr: &TransientResult) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(tr.node_names.iter().skip(1).cloned());
    w.write_record(&header)?;
    for (k, t) in tr.times.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(tr.voltages.iter().skip(1).map(|v| v[k].to_string()));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// One line of the design comparison; `None` fields print as `FAIL`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub design: String,
    pub state: String,
    pub power_uw: Option<f64>,
    pub delay_ps: Option<f64>,
    pub errors: Option<usize>,
}

impl SweepRow {
    pub fn from_ensemble(r: &EnsembleResult) -> Self {
        let power = Stat::of(r.per_sample.iter().filter_map(|s| s.power.map(|p| p * 1e6)));
        let delay = Stat::of(
            r.per_sample
                .iter()
                .filter_map(|s| s.delay.map(|d| d * 1e12)),
        );
        Self {
            design: r.design_id.clone(),
            state: r.data_state.to_string(),
            power_uw: power.mean,
            delay_ps: delay.mean,
            errors: Some(r.error_count),
        }
    }

    pub fn failed(id: DesignId, state: MtjState) -> Self {
        Self {
            design: id.to_string(),
            state: state.to_string(),
            power_uw: None,
            delay_ps: None,
            errors: None,
        }
    }

    fn cells(&self) -> [String; 5] {
        let num = |v: Option<f64>, prec: usize| {
            v.map_or_else(|| "FAIL".to_string(), |v| format!("{v:.prec$}"))
        };
        [
            self.design.clone(),
            self.state.clone(),
            num(self.power_uw, 3),
            num(self.delay_ps, 1),
            self.errors
                .map_or_else(|| "FAIL".to_string(), |e| e.to_string()),
        ]
    }
}

const SWEEP_HEADER: [&str; 5] = ["design", "state", "power_uw", "delay_ps", "errors"];

pub fn sweep_csv(rows: &[SweepRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record(r.cells())?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Columns padded to their widest cell.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    let cells: Vec<[String; 5]> = std::iter::once(SWEEP_HEADER.map(String::from))
        .chain(rows.iter().map(SweepRow::cells))
        .collect();
    let widths: Vec<usize> = (0..5)
        .map(|c| {
            cells
                .iter()
                .map(|r| r[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in &cells {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (v, &w))| {
                if c < 2 {
                    format!("{v:<w$}")
                } else {
                    format!("{v:>w$}")
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Non-empty values of the column matching `q` in a per-sample CSV, with an axis label.
pub fn read_column(path: &Path, q: Quantity) -> Result<(Vec<f64>, String), Failure> {
    let (column, label) = match q {
        Quantity::Delay => ("delay_ps", "readout delay (ps)"),
        Quantity::Power => ("power_uw", "power (µW)"),
        Quantity::Margin => ("sense_margin_mv", "sense margin (mV)"),
        Quantity::Resistance => {
            return Err(Failure::Usage(
                "resistance is sampled directly; omit --input".to_string(),
            ))
        }
    };
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let headers = r
        .headers()
        .map_err(|e| Failure::Usage(e.to_string()))?
        .clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Failure::Usage(format!("{} has no `{column}` column", path.display())))?;
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Failure::Usage(e.to_string()))?;
        let cell = rec.get(idx).unwrap_or("");
        if cell.is_empty() {
            continue;
        }
        values
            .push(cell.parse::<f64>().map_err(|_| {
                Failure::Usage(format!("bad number `{cell}` in column `{column}`"))
            })?);
    }
    Ok((values, label.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize, delay: Option<f64>) -> Row {
        Row {
            index: i,
            decision: "P".into(),
            correct: true,
            delay_ps: delay,
            power_uw: Some(1.0 + i as f64),
            sense_margin_mv: Some(10.0),
            converged: true,
        }
    }

    #[test]
    fn stat_values() {
        let s = Stat::of([1.0, 2.0, 3.0].into_iter());
        assert_eq!(s.n, 3);
        assert_eq!(s.mean, Some(2.0));
        assert_eq!(s.std, Some(1.0));
        let one = Stat::of([5.0].into_iter());
        assert_eq!((one.mean, one.std), (Some(5.0), None));
        assert_eq!(Stat::of(std::iter::empty()).mean, None);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row(0, Some(270.5)), row(1, None), row(2, Some(0.1 + 0.2))];
        let report = RunReport::from_rows("nvsa-1ref", MtjState::P, rows.clone(), None);
        let text = report.csv().unwrap();
        assert!(text
            .starts_with("index,decision,correct,delay_ps,power_uw,sense_margin_mv,converged\n"));
        let back: Vec<Row> = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(back, rows);
        assert_eq!(Summary::of(&back), report.summary);
    }

    #[test]
    fn sweep_formats() {
        let rows = vec![
            SweepRow {
                design: "csa-1ref".into(),
                state: "P".into(),
                power_uw: Some(5.125),
                delay_ps: Some(438.52),
                errors: Some(38),
            },
            SweepRow::failed("vsa-3s".parse().unwrap(), MtjState::Ap),
        ];
        let csv = sweep_csv(&rows).unwrap();
        assert_eq!(
            csv,
            "design,state,power_uw,delay_ps,errors\ncsa-1ref,P,5.125,438.5,38\nvsa-3s,AP,FAIL,FAIL,FAIL\n"
        );
        let table = sweep_table(&rows);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("design    state"));
        assert!(lines[2].ends_with("FAIL"));
    }
}
