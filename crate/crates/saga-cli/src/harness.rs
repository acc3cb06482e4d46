//! Seeded, repeated experiment execution.
//!
//! One experiment = one dataset, one train/validation/test split, and one
//! or more algorithm arms, each run `repetitions` times with run seeds
//! `run_seed + 0 .. run_seed + repetitions`. All arms share the split, so
//! their result sets are pairwise comparable.

use std::time::Instant;

use saga_core::{
    fit_tree, majority_baseline, run_chc, run_saga, shuffle_split, summarize_runs, ChcConfig,
    Clock, EvalBudgetCounter, FeatureMask, RunReport, RunSummary, SagaConfig, SplitData, TableData,
    TrainView,
};

use crate::config::{Arm, ExperimentConfig};
use crate::csv_io::load_dataset;
use crate::{tables, CliError};

/// Real elapsed time since construction.
#[derive(Debug)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn start() -> Self {
        Self {
            start: Instant::now(),
        }
    }
}

impl Clock for WallClock {
    fn elapsed_secs(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// One arm's result set over the shared split.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmResult {
    pub arm: Arm,
    pub reports: Vec<RunReport>,
    pub summary: RunSummary,
}

/// Everything an experiment produced, before artifact emission.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub dataset_id: String,
    pub split_seed: u64,
    pub n_features: usize,
    /// Accuracy of always predicting the training majority class on the
    /// test partition — the floor any model must clear.
    pub majority_test_accuracy: f64,
    pub arms: Vec<ArmResult>,
}

impl ExperimentResult {
    pub fn arm(&self, arm: Arm) -> Option<&ArmResult> {
        self.arms.iter().find(|r| r.arm == arm)
    }
}

/// Single tree on all features: the no-selection reference point. Runs
/// once — the model is deterministic, so repetitions would be copies.
pub fn baseline_report(split: &SplitData, dataset_id: &str) -> Result<RunReport, CliError> {
    let clock = WallClock::start();
    let mask = FeatureMask::ones(split.train.n_features());
    let model = fit_tree(&TrainView::full(&split.train), &mask)?;
    let validation_accuracy = model.accuracy(&split.validation)?;
    let test_accuracy = model.accuracy(&split.test)?;
    Ok(RunReport {
        dataset_id: dataset_id.to_string(),
        arm: String::from("baseline"),
        run_seed: 0,
        split_seed: split.split_seed,
        best_mask: mask,
        best_validation_accuracy: validation_accuracy,
        test_accuracy,
        generations: 0,
        counters: EvalBudgetCounter::default(),
        levels: Vec::new(),
        trace: Vec::new(),
        elapsed_secs: clock.elapsed_secs(),
    })
}

fn run_arm(
    arm: Arm,
    split: &SplitData,
    cfg: &ExperimentConfig,
    dataset_id: &str,
) -> Result<Vec<RunReport>, CliError> {
    match arm {
        Arm::Baseline => Ok(vec![baseline_report(split, dataset_id)?]),
        Arm::Chc => (0..cfg.repetitions)
            .map(|r| {
                let chc = ChcConfig {
                    seed: cfg.run_seed + u64::from(r),
                    ..cfg.chc.clone()
                };
                let clock = WallClock::start();
                run_chc(split, &chc, dataset_id, &clock).map_err(CliError::from)
            })
            .collect(),
        Arm::Saga => (0..cfg.repetitions)
            .map(|r| {
                let saga = SagaConfig {
                    seed: cfg.run_seed + u64::from(r),
                    ..cfg.saga.clone()
                };
                let clock = WallClock::start();
                run_saga(split, &saga, dataset_id, &clock).map_err(CliError::from)
            })
            .collect(),
    }
}

/// Runs every requested arm on an already-loaded table. Pure compute — no
/// files are touched.
pub fn run_on_table(
    table: &TableData,
    cfg: &ExperimentConfig,
    dataset_id: &str,
) -> Result<ExperimentResult, CliError> {
    cfg.validate()?;
    let split = shuffle_split(table, cfg.split_seed)?;
    let majority_test_accuracy = majority_baseline(&split.train, &split.test);

    let mut arms = Vec::with_capacity(cfg.arms.len());
    for &arm in &cfg.arms {
        let reports = run_arm(arm, &split, cfg, dataset_id)?;
        let summary = summarize_runs(&reports)?;
        arms.push(ArmResult {
            arm,
            reports,
            summary,
        });
    }
    Ok(ExperimentResult {
        dataset_id: dataset_id.to_string(),
        split_seed: cfg.split_seed,
        n_features: table.n_features(),
        majority_test_accuracy,
        arms,
    })
}

/// Loads the configured dataset, runs every arm, and writes all artifacts
/// under the configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    cfg.validate()?;
    let table = load_dataset(&cfg.dataset, cfg.target_column, &cfg.missing_tokens)?;
    let result = run_on_table(&table, cfg, &cfg.dataset_id())?;
    tables::write_all(&result, cfg)?;
    Ok(result)
}
