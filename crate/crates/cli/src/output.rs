//! CSV rows and the JSON run manifest.
//!
//! Every CSV has the header `experiment,probe_id,param,value,tolerance,pass`.
//! Data rows leave `tolerance` and `pass` empty; check rows pass when
//! `value <= tolerance`. Floats are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 6] = [
    "experiment",
    "probe_id",
    "param",
    "value",
    "tolerance",
    "pass",
];

/// Marker appended to files of a run that did not complete.
pub const PARTIAL_SUFFIX: &str = ".partial";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReportKind {
    Convergence,
    Trace,
    Ir,
    Checks,
}

impl ReportKind {
    pub fn file_name(self) -> &'static str {
        match self {
            ReportKind::Convergence => "convergence.csv",
            ReportKind::Trace => "trace.csv",
            ReportKind::Ir => "ir.csv",
            ReportKind::Checks => "checks.csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub report: ReportKind,
    pub experiment: &'static str,
    pub probe_id: String,
    pub param: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl Row {
    pub fn fields(&self) -> [String; 6] {
        [
            self.experiment.to_string(),
            self.probe_id.clone(),
            self.param.clone(),
            self.value.to_string(),
            self.tolerance.map(|t| t.to_string()).unwrap_or_default(),
            self.pass.map(|p| p.to_string()).unwrap_or_default(),
        ]
    }
}

/// Collects the rows of one job.
#[derive(Debug)]
pub struct Recorder {
    experiment: &'static str,
    probe_id: String,
    pub rows: Vec<Row>,
    /// Largest `|‖state‖ - 1|` passed to [`Recorder::track_norm`].
    pub norm_drift: Option<f64>,
}

impl Recorder {
    pub fn new(experiment: &'static str, probe_id: &str) -> Self {
        Self {
            experiment,
            probe_id: probe_id.to_string(),
            rows: Vec::new(),
            norm_drift: None,
        }
    }

    pub fn track_norm(&mut self, norm: f64) {
        let drift = (norm - 1.0).abs();
        self.norm_drift = Some(self.norm_drift.map_or(drift, |d| d.max(drift)));
    }

    pub fn data(&mut self, report: ReportKind, param: impl Into<String>, value: f64) {
        self.rows.push(Row {
            report,
            experiment: self.experiment,
            probe_id: self.probe_id.clone(),
            param: param.into(),
            value,
            tolerance: None,
            pass: None,
        });
    }

    /// Check row passing when `value <= tolerance`.
    pub fn check(&mut self, param: impl Into<String>, value: f64, tolerance: f64) {
        self.rows.push(Row {
            report: ReportKind::Checks,
            experiment: self.experiment,
            probe_id: self.probe_id.clone(),
            param: param.into(),
            value,
            tolerance: Some(tolerance),
            pass: Some(value <= tolerance),
        });
    }
}

/// Write `rows` grouped by report kind, one CSV per kind present (the
/// checks file is always written). Returns the paths in kind order.
pub fn write_csvs(dir: &Path, rows: &[Row], partial: bool) -> Result<Vec<PathBuf>> {
    let mut by_kind: BTreeMap<ReportKind, Vec<&Row>> = BTreeMap::new();
    by_kind.entry(ReportKind::Checks).or_default();
    for row in rows {
        by_kind.entry(row.report).or_default().push(row);
    }
    let mut written = Vec::new();
    for (kind, rows) in by_kind {
        let mut name = kind.file_name().to_string();
        if partial {
            name.push_str(PARTIAL_SUFFIX);
        }
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        let to_err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
        w.write_record(CSV_HEADER).map_err(to_err)?;
        for row in rows {
            w.write_record(row.fields()).map_err(to_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct JobSummary {
    pub probe_id: String,
    /// Largest `|‖state‖ - 1|` seen in the job.
    pub norm_drift_max: Option<f64>,
    pub checks: usize,
    pub failed_checks: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool: String,
    pub tool_version: String,
    pub config_digest: String,
    pub config: BTreeMap<String, String>,
    pub status: String,
    pub exit_code: u8,
    pub error: Option<String>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub split_steps: u64,
    pub norm_drift_max: Option<f64>,
    pub jobs: Vec<JobSummary>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Output(format!("manifest: {e}")))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
