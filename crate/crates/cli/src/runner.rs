//! Runs a validated experiment on a worker pool and writes its outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use dollard_core::dynamics::steps_taken;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{exit, CliError, Result};
use crate::experiments::{run_job, Setup};
use crate::output::{
    write_csvs, JobSummary, Recorder, ReportKind, Row, RunManifest, PARTIAL_SUFFIX,
};
use crate::validate::validate;

pub const TOOL_NAME: &str = "dollard-lab";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    /// Overrides `output.dir` of the config.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub rows: Vec<Row>,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        self.manifest.exit_code
    }
}

/// Validate `config`, run every job, and write the CSVs and manifest.
///
/// Validation failures are returned as [`CliError::Config`] before anything
/// is written. A job error aborts the run: completed rows are still written,
/// with [`PARTIAL_SUFFIX`] appended to every CSV name.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let diagnostics = validate(config);
    if !diagnostics.is_empty() {
        return Err(CliError::config(diagnostics.join("\n")));
    }
    if opts.workers == 0 {
        return Err(CliError::config("--workers must be at least 1"));
    }
    let out_dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    clear_previous(&out_dir)?;

    let setup = Setup::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| CliError::Output(format!("worker pool: {e}")))?;
    let started = Instant::now();
    let steps_before = steps_taken();
    let name = config.experiment.name();
    let jobs: Vec<(Recorder, Option<CliError>)> = pool.install(|| {
        setup
            .job_ids()
            .par_iter()
            .map(|id| {
                let mut rec = Recorder::new(name, id);
                let err = run_job(&setup, id, &mut rec).err();
                (rec, err)
            })
            .collect()
    });
    let wall_clock_seconds = started.elapsed().as_secs_f64();
    let split_steps = steps_taken() - steps_before;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut first_error: Option<CliError> = None;
    for (rec, err) in jobs {
        let checks: Vec<&Row> = rec
            .rows
            .iter()
            .filter(|r| r.report == ReportKind::Checks)
            .collect();
        summaries.push(JobSummary {
            probe_id: rec
                .rows
                .first()
                .map_or_else(String::new, |r| r.probe_id.clone()),
            norm_drift_max: rec.norm_drift,
            checks: checks.len(),
            failed_checks: checks.iter().filter(|r| r.pass == Some(false)).count(),
            error: err.as_ref().map(|e| e.to_string()),
        });
        rows.extend(rec.rows);
        if first_error.is_none() {
            first_error = err;
        }
    }
    for (summary, id) in summaries.iter_mut().zip(setup.job_ids()) {
        summary.probe_id = id;
    }

    let failed = rows.iter().any(|r| r.pass == Some(false));
    let (status, exit_code) = match (&first_error, failed) {
        (Some(e), _) => ("aborted", e.exit_code()),
        (None, true) => ("fail", exit::ASSERTION_FAILED),
        (None, false) => ("pass", exit::PASS),
    };
    let files = write_csvs(&out_dir, &rows, first_error.is_some())?;
    let norm_drift_max = summaries
        .iter()
        .filter_map(|s| s.norm_drift_max)
        .reduce(f64::max);
    let manifest = RunManifest {
        experiment: name.to_string(),
        tool: TOOL_NAME.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: config.digest(),
        config: config.to_pairs(),
        status: status.to_string(),
        exit_code,
        error: first_error.as_ref().map(|e| e.to_string()),
        workers: opts.workers,
        wall_clock_seconds,
        split_steps,
        norm_drift_max,
        jobs: summaries,
        files: files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
    };
    manifest.write(&out_dir)?;
    Ok(RunOutcome {
        manifest,
        rows,
        out_dir,
    })
}

fn clear_previous(dir: &Path) -> Result<()> {
    let kinds = [
        ReportKind::Convergence,
        ReportKind::Trace,
        ReportKind::Ir,
        ReportKind::Checks,
    ];
    let mut names: Vec<String> = vec!["manifest.json".into()];
    for kind in kinds {
        names.push(kind.file_name().into());
        names.push(format!("{}{PARTIAL_SUFFIX}", kind.file_name()));
    }
    for name in names {
        let path = dir.join(name);
        if path.exists() {
            std::fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(())
}
