use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::LogBase;
use crate::sampling::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    HaarOpnormMean,
    HaarFroMean,
    HaydenWinter,
    DesignQuality,
    LevyTails,
    SubspaceVariation,
    PolyEnvelope,
    AdditivityGap,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::HaarOpnormMean,
        ExperimentKind::HaarFroMean,
        ExperimentKind::HaydenWinter,
        ExperimentKind::DesignQuality,
        ExperimentKind::LevyTails,
        ExperimentKind::SubspaceVariation,
        ExperimentKind::PolyEnvelope,
        ExperimentKind::AdditivityGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::HaarOpnormMean => "haar-opnorm-mean",
            ExperimentKind::HaarFroMean => "haar-fro-mean",
            ExperimentKind::HaydenWinter => "hayden-winter",
            ExperimentKind::DesignQuality => "design-quality",
            ExperimentKind::LevyTails => "levy-tails",
            ExperimentKind::SubspaceVariation => "subspace-variation",
            ExperimentKind::PolyEnvelope => "poly-envelope",
            ExperimentKind::AdditivityGap => "additivity-gap",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Validation(format!("unknown experiment `{s}`")))
    }
}

/// One experiment run. Serialized as a flat TOML table; absent keys fall back
/// to per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Moment order for design-quality.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Deviation threshold for levy-tails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Layer parameter for the poly-envelope derivative regimes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub out_path: PathBuf,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub log_base: LogBase,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, out_path: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            k: None,
            d: None,
            m: None,
            p: None,
            t: None,
            depth: None,
            n_samples: None,
            eps: None,
            lambda: None,
            j: None,
            precision_bits: None,
            restarts: None,
            seed: 0,
            stream: 0,
            out_path: out_path.into(),
            parallel: false,
            log_base: LogBase::Bits,
        }
    }

    pub fn rng_seed(&self) -> RngSeed {
        RngSeed::new(self.seed, self.stream)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Serialization(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Path of the per-sample CSV written next to the JSON report.
    pub fn csv_path(&self) -> PathBuf {
        self.out_path.with_extension("csv")
    }

    pub(crate) fn need<T: Copy>(&self, value: Option<T>, name: &str) -> Result<T> {
        value.ok_or_else(|| LabError::Validation(format!("{} requires `{name}`", self.experiment)))
    }
}

/// A list of runs plus scan-level options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<PathBuf>,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub run: Vec<ExperimentConfig>,
}

impl ScanFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
