//! Seeded experiment runners that write a JSON report and a per-sample CSV.

mod config;
mod report;
mod runners;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ExperimentKind, ScanFile};
pub use report::{write_atomic, BoundLabel, Cell, ExperimentReport, Summary, SCHEMA_VERSION};

use crate::error::{LabError, Result};

pub const THREADS_ENV: &str = "HOLEVO_LAB_THREADS";

/// Sizes the global rayon pool from `HOLEVO_LAB_THREADS`, if set. Must run
/// before any parallel work; later calls are ignored.
pub fn init_threads_from_env() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| LabError::Validation(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(LabError::Validation(format!("{THREADS_ENV} must be >= 1")));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs one experiment and writes `out_path` (JSON) and its `.csv` sibling.
///
/// Without `parallel` the run is confined to one worker thread. Per-sample
/// records depend only on the seed either way.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.out_path.as_os_str().is_empty() {
        return Err(LabError::Validation("out_path must be set".into()));
    }
    let started = Instant::now();
    let output = if config.parallel {
        runners::dispatch(config)?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| LabError::Validation(e.to_string()))?
            .install(|| runners::dispatch(config))?
    };
    let summary = report::summarize(output.metric, &output.columns, &output.records, output.bounds);
    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        experiment: config.experiment,
        config: config.clone(),
        log_base: config.log_base,
        columns: output.columns,
        records: output.records,
        summary,
        details: output.details,
        csv_path: config.csv_path(),
        wall_time_s: started.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    write_atomic(&report.csv_path, &report.to_csv_bytes()?)?;
    write_atomic(&config.out_path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub out_path: PathBuf,
    pub experiment: ExperimentKind,
    pub ok: bool,
    pub error: Option<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanIndex {
    pub schema_version: u32,
    pub entries: Vec<IndexEntry>,
}

impl ScanIndex {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.ok).count()
    }
}

/// Runs every config, isolating failures, and writes an index to `index_path`.
///
/// Rejects an empty list and duplicate output paths before anything runs.
pub fn scan(configs: &[ExperimentConfig], parallel: bool, index_path: &Path) -> Result<(ScanIndex, Vec<Option<ExperimentReport>>)> {
    if configs.is_empty() {
        return Err(LabError::Validation("scan needs at least one config".into()));
    }
    let mut seen = HashSet::new();
    for c in configs {
        if !seen.insert(c.out_path.clone()) {
            return Err(LabError::Collision(format!("out_path {} appears more than once", c.out_path.display())));
        }
        if c.out_path == index_path || c.csv_path() == index_path {
            return Err(LabError::Collision(format!("out_path {} collides with the index", c.out_path.display())));
        }
    }
    let results: Vec<Result<ExperimentReport>> = if parallel {
        configs.par_iter().map(run).collect()
    } else {
        configs.iter().map(run).collect()
    };
    let entries = configs
        .iter()
        .zip(&results)
        .map(|(c, r)| IndexEntry {
            out_path: c.out_path.clone(),
            experiment: c.experiment,
            ok: r.is_ok(),
            error: r.as_ref().err().map(|e| e.to_string()),
            exit_code: r.as_ref().err().map_or(0, LabError::exit_code),
        })
        .collect();
    let index = ScanIndex { schema_version: SCHEMA_VERSION, entries };
    write_atomic(index_path, serde_json::to_string_pretty(&index)?.as_bytes())?;
    Ok((index, results.into_iter().map(Result::ok).collect()))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
