//! Run reports: traces, per-level logs, budget totals, and the
//! time-to-match comparison between run sets.
//!
//! Reports are plain data. With a null clock and fixed seeds, two runs of
//! the same configuration produce bit-identical reports, which the test
//! suite relies on.

use alloc::string::String;
use alloc::vec::Vec;

use crate::clock::Clock;
use crate::error::GaError;
use crate::fitness::EvalBudgetCounter;
use crate::mask::FeatureMask;

/// One point on a run's progress curve. Counters are cumulative.
///
/// `best_true_fitness` is the best validation accuracy measured with the
/// full training model so far; before the first full-model evaluation of a
/// surrogate stage it reports 0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceEvent {
    pub elapsed_secs: f64,
    pub instances_processed: u64,
    pub surrogate_evals: u64,
    pub full_evals: u64,
    pub best_true_fitness: f64,
}

/// Budget and outcome of one engine run within a larger search: one
/// surrogate perseverance repetition, or the final full-fidelity stage
/// (recorded as `level = 0`). Counter fields are deltas for this run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelLog {
    /// Surrogate level, counting down; 0 marks the final full-data stage.
    pub level: usize,
    /// Perseverance repetition within the level, 0-based.
    pub repetition: usize,
    pub pop_size: usize,
    pub sample_size: usize,
    pub generations: u64,
    pub surrogate_evals: u64,
    pub full_evals: u64,
    pub instances_processed: u64,
    /// Full-model validation accuracy of this run's candidate mask.
    pub candidate_true_fitness: f64,
    /// True when evolution control abandoned the level before stagnation.
    pub switched_early: bool,
}

/// Trace event from the current counter totals and clock reading.
pub(crate) fn snapshot(
    counter: &EvalBudgetCounter,
    clock: &dyn Clock,
    best_true_fitness: f64,
) -> TraceEvent {
    TraceEvent {
        elapsed_secs: clock.elapsed_secs(),
        instances_processed: counter.instances_processed,
        surrogate_evals: counter.surrogate_evals,
        full_evals: counter.full_evals,
        best_true_fitness,
    }
}

/// Complete record of one search run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunReport {
    pub dataset_id: String,
    /// Which algorithm arm produced this run, e.g. `chc` or `saga[so=1]`.
    pub arm: String,
    pub run_seed: u64,
    pub split_seed: u64,
    pub best_mask: FeatureMask,
    /// Full-model validation accuracy of `best_mask`.
    pub best_validation_accuracy: f64,
    /// Test accuracy of a full-train model on `best_mask`; reporting only,
    /// not counted in the budget.
    pub test_accuracy: f64,
    pub generations: u64,
    pub counters: EvalBudgetCounter,
    pub levels: Vec<LevelLog>,
    pub trace: Vec<TraceEvent>,
    pub elapsed_secs: f64,
}

impl RunReport {
    /// Budget consumed by surrogate repetitions only (levels ≥ 1).
    pub fn surrogate_totals(&self) -> EvalBudgetCounter {
        let mut totals = EvalBudgetCounter::default();
        for row in self.levels.iter().filter(|row| row.level >= 1) {
            totals.surrogate_evals += row.surrogate_evals;
            totals.full_evals += row.full_evals;
            totals.instances_processed += row.instances_processed;
        }
        totals
    }

    /// Population sizes of the surrogate repetitions, in execution order.
    pub fn population_schedule(&self) -> Vec<usize> {
        self.levels
            .iter()
            .filter(|row| row.level >= 1)
            .map(|row| row.pop_size)
            .collect()
    }
}

/// Where a trace first reaches a target fitness.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchPoint {
    pub event_index: usize,
    pub elapsed_secs: f64,
    pub instances_processed: u64,
    pub surrogate_evals: u64,
    pub full_evals: u64,
}

/// First trace event whose best true fitness reaches `target` exactly
/// (`>=`, no tolerance: equal configurations produce bit-equal ratios).
pub fn time_to_match(trace: &[TraceEvent], target: f64) -> Option<MatchPoint> {
    trace.iter().enumerate().find_map(|(i, e)| {
        (e.best_true_fitness >= target).then_some(MatchPoint {
            event_index: i,
            elapsed_secs: e.elapsed_secs,
            instances_processed: e.instances_processed,
            surrogate_evals: e.surrogate_evals,
            full_evals: e.full_evals,
        })
    })
}

/// For each reference/baseline pair (paired by position), where the
/// baseline's trace first matches the reference run's final fitness;
/// `None` where it never does.
///
/// Every pair must come from the same dataset and split.
pub fn compare_runs(
    reference: &[RunReport],
    baseline: &[RunReport],
) -> Result<Vec<Option<MatchPoint>>, GaError> {
    if reference.len() != baseline.len() {
        return Err(GaError::BadConfig(String::from(
            "compare_runs needs equally sized run sets",
        )));
    }
    reference
        .iter()
        .zip(baseline)
        .map(|(r, b)| {
            if r.dataset_id != b.dataset_id || r.split_seed != b.split_seed {
                return Err(GaError::DatasetMismatch);
            }
            Ok(time_to_match(&b.trace, r.best_validation_accuracy))
        })
        .collect()
}
