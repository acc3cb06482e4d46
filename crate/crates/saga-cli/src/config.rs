//! Experiment configuration: a single JSON document, with every field
//! optional and defaulted, plus command-line overrides applied on top.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use saga_core::{ChcConfig, SagaConfig};

use crate::CliError;

/// Which algorithm produces a result set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    /// One tree on all features; no search, no trace.
    Baseline,
    /// The genetic engine on the full training set.
    Chc,
    /// The surrogate-assisted staged search.
    Saga,
}

impl Arm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arm::Baseline => "baseline",
            Arm::Chc => "chc",
            Arm::Saga => "saga",
        }
    }
}

impl std::str::FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Arm::Baseline),
            "chc" => Ok(Arm::Chc),
            "saga" => Ok(Arm::Saga),
            other => Err(format!(
                "unknown arm `{other}` (expected baseline, chc, or saga)"
            )),
        }
    }
}

/// Full description of one experiment: dataset, arms, hyper-parameters,
/// seeds, and output location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Path to a headered CSV dataset.
    pub dataset: PathBuf,
    /// Index of the target column; the last column when absent.
    pub target_column: Option<usize>,
    /// Cell values treated as missing.
    pub missing_tokens: Vec<String>,
    /// Result sets to produce, in order; the first is the reference arm
    /// of comparison tables.
    pub arms: Vec<Arm>,
    /// Hyper-parameters of the staged search (`saga` arm).
    pub saga: SagaConfig,
    /// Hyper-parameters of the plain engine (`chc` arm).
    pub chc: ChcConfig,
    /// Seeded runs per arm; run r uses seed `run_seed + r`.
    pub repetitions: u32,
    /// Seed of the train/validation/test shuffle, shared by all arms.
    pub split_seed: u64,
    /// Base run seed.
    pub run_seed: u64,
    /// Directory receiving summary.json, trace and table CSVs.
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            target_column: None,
            missing_tokens: crate::csv_io::default_missing_tokens(),
            arms: vec![Arm::Saga],
            saga: SagaConfig::default(),
            chc: ChcConfig::default(),
            repetitions: 10,
            split_seed: 0,
            run_seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Parses a JSON config file.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    /// Checks everything that does not require the dataset.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.dataset.as_os_str().is_empty() {
            return Err(CliError::Config(String::from("no dataset given")));
        }
        if self.arms.is_empty() {
            return Err(CliError::Config(String::from("no arms requested")));
        }
        for (i, arm) in self.arms.iter().enumerate() {
            if self.arms[..i].contains(arm) {
                return Err(CliError::Config(format!(
                    "arm `{}` requested twice",
                    arm.as_str()
                )));
            }
        }
        if self.repetitions < 1 {
            return Err(CliError::Config(String::from(
                "repetitions must be at least 1",
            )));
        }
        if self.arms.contains(&Arm::Saga) {
            self.saga.validate()?;
        }
        if self.arms.contains(&Arm::Chc) {
            self.chc.validate()?;
        }
        Ok(())
    }

    /// Identifier used in reports and for pairing comparisons: the dataset
    /// file stem.
    pub fn dataset_id(&self) -> String {
        self.dataset
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| String::from("dataset"))
    }
}
