use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::channels::BoundDirection;
use crate::error::{LabError, Result};
use crate::linalg::LogBase;

pub const SCHEMA_VERSION: u32 = 1;

/// Non-finite floats travel as JSON `null` and come back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// One CSV/JSON cell. NaN becomes `Null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn num(x: f64) -> Self {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Null
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Null => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::num)
    }
}

/// A reference value that a summary is compared against, with the side of the
/// true quantity it lies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundLabel {
    pub quantity: String,
    /// NaN (JSON `null`) when the label only states a direction.
    #[serde(with = "nullable")]
    pub value: f64,
    pub direction: BoundDirection,
}

impl BoundLabel {
    pub fn new(quantity: impl Into<String>, value: f64, direction: BoundDirection) -> Self {
        Self { quantity: quantity.into(), value, direction }
    }
}

/// Statistics of the metric column over rows where it is numeric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub metric: String,
    pub n: usize,
    #[serde(with = "nullable")]
    pub mean: f64,
    #[serde(with = "nullable")]
    pub stderr: f64,
    #[serde(with = "nullable")]
    pub min: f64,
    #[serde(with = "nullable")]
    pub max: f64,
    pub bounds: Vec<BoundLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub log_base: LogBase,
    pub columns: Vec<String>,
    pub records: Vec<Vec<Cell>>,
    pub summary: Summary,
    pub details: serde_json::Value,
    pub csv_path: PathBuf,
    pub wall_time_s: f64,
    pub version: String,
    pub timestamp_unix: u64,
}

impl ExperimentReport {
    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r[idx].clone()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        Some(self.column(name)?.iter().filter_map(Cell::as_f64).collect())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.records {
            w.write_record(r.iter().map(Cell::to_csv))?;
        }
        w.into_inner().map_err(|e| LabError::Serialization(e.to_string()))
    }
}

pub(crate) fn summarize(metric: &str, columns: &[String], records: &[Vec<Cell>], bounds: Vec<BoundLabel>) -> Summary {
    let idx = columns.iter().position(|c| c == metric).expect("metric column exists");
    let vals: Vec<f64> = records.iter().filter_map(|r| r[idx].as_f64()).collect();
    let (mean, stderr) = if vals.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        crate::concentration::mean_stderr(&vals)
    };
    Summary {
        metric: metric.to_string(),
        n: vals.len(),
        mean,
        stderr,
        min: vals.iter().copied().fold(f64::INFINITY, f64::min),
        max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        bounds,
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| LabError::Io(e.error))?;
    Ok(())
}
