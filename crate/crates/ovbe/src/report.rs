//! Report documents and their JSON / CSV encodings.
//!
//! JSON field order is the struct field order, so output is byte-stable for
//! a given input. CSV floats use Rust's shortest round-trip formatting.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vbe_core::lab::VerificationReport;
use vbe_core::pipeline::{Aggregate, Baselines, RoundComparison, Verdict, WindowResult, WindowSeries};

use crate::config::{Format, Settings};
use crate::error::{Error, Result};

pub const SCHEMA: &str = "ovbe.report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeReport {
    pub schema: String,
    pub config: Settings,
    pub windows: Vec<WindowResult>,
    pub aggregates: Vec<Aggregate>,
    pub baselines: Option<Baselines>,
    pub warnings: Vec<String>,
}

impl ComputeReport {
    pub fn new(config: Settings, series: WindowSeries, baselines: Option<Baselines>, mut warnings: Vec<String>) -> Self {
        warnings.extend(series.warnings);
        ComputeReport {
            schema: SCHEMA.into(),
            config,
            windows: series.results,
            aggregates: series.aggregates,
            baselines,
            warnings,
        }
    }

    pub fn series(&self) -> WindowSeries {
        WindowSeries { results: self.windows.clone(), aggregates: self.aggregates.clone(), warnings: Vec::new() }
    }

    fn measure_labels(&self) -> Vec<String> {
        match self.windows.first() {
            Some(w) => w.values.iter().map(|v| v.measure.clone()).collect(),
            None if !self.aggregates.is_empty() => self.aggregates.iter().map(|a| a.measure.clone()).collect(),
            None => self.config.entropy_measures().map(|ms| ms.iter().map(|m| m.label()).collect()).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: String,
    pub proposals: usize,
    pub windows: Vec<WindowResult>,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema: String,
    pub config: Settings,
    pub round_a: RoundSummary,
    pub round_b: RoundSummary,
    pub comparison: RoundComparison,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub schema: String,
    pub balances: String,
    pub baselines: Baselines,
}

/// Something that can be written as JSON or CSV.
pub trait Document: Serialize {
    fn csv(&self) -> Result<Vec<u8>>;

    fn json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report types always serialize");
        out.push(b'\n');
        out
    }

    fn encode(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => Ok(self.json()),
            Format::Csv => self.csv(),
        }
    }
}

fn csv_bytes(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format { path: "<csv>".into(), message: e.to_string() };
    w.write_record(&header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| Error::Format { path: "<csv>".into(), message: e.to_string() })
}

impl Document for ComputeReport {
    /// One row per window: `window_index, first_ordinal, last_ordinal,
    /// <measures…>, participation, largest_bloc_share`.
    fn csv(&self) -> Result<Vec<u8>> {
        let labels = self.measure_labels();
        let mut header: Vec<String> = ["window_index", "first_ordinal", "last_ordinal"].map(String::from).to_vec();
        header.extend(labels.iter().cloned());
        header.push("participation".into());
        header.push("largest_bloc_share".into());
        let rows = self
            .windows
            .iter()
            .map(|w| {
                let mut row = vec![w.window_index.to_string(), w.first_ordinal.to_string(), w.last_ordinal.to_string()];
                row.extend(labels.iter().map(|l| w.value(l).map_or(String::new(), |v| v.to_string())));
                row.push(w.participation.to_string());
                row.push(w.clusters.largest_bloc_share.to_string());
                row
            })
            .collect();
        csv_bytes(header, rows)
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::AMoreDecentralized => "a_more_decentralized",
        Verdict::BMoreDecentralized => "b_more_decentralized",
        Verdict::Tie => "tie",
    }
}

impl Document for CompareReport {
    /// One row per measure.
    fn csv(&self) -> Result<Vec<u8>> {
        let header = ["measure", "avg_a", "avg_b", "difference", "verdict"].map(String::from).to_vec();
        let rows = self
            .comparison
            .measures
            .iter()
            .map(|m| {
                vec![
                    m.measure.clone(),
                    m.avg_a.to_string(),
                    m.avg_b.to_string(),
                    m.difference.to_string(),
                    verdict_str(m.verdict).into(),
                ]
            })
            .collect();
        csv_bytes(header, rows)
    }
}

impl Document for BaselineReport {
    fn csv(&self) -> Result<Vec<u8>> {
        let b = &self.baselines;
        let mut header = ["accounts", "total", "gini", "nakamoto_threshold", "nakamoto"].map(String::from).to_vec();
        header.extend(b.trivial_vbe.iter().map(|m| format!("trivial_{}", m.measure)));
        let mut row =
            vec![b.accounts.to_string(), b.total.to_string(), b.gini.to_string(), b.nakamoto_threshold.to_string(), b.nakamoto.to_string()];
        row.extend(b.trivial_vbe.iter().map(|m| m.value.to_string()));
        csv_bytes(header, vec![row])
    }
}

impl Document for VerificationReport {
    fn csv(&self) -> Result<Vec<u8>> {
        let header = ["theorem", "seed", "trials", "passes", "master_checks", "master_holds", "all_passed"]
            .map(String::from)
            .to_vec();
        let row = vec![
            self.theorem.as_str().into(),
            self.seed.to_string(),
            self.trials.to_string(),
            self.passes.to_string(),
            self.master_checks.to_string(),
            self.master_holds.to_string(),
            self.all_passed().to_string(),
        ];
        csv_bytes(header, vec![row])
    }
}

pub fn parse_compute_report(bytes: &[u8]) -> Result<ComputeReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::Format { path: "<report>".into(), message: e.to_string() })
}

/// Writes to `out`, or to `stdout` when no path is given.
pub fn write_output(bytes: &[u8], out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => stdout.write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}
