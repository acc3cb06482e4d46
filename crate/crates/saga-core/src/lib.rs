//! Surrogate-assisted genetic algorithm for wrapper feature selection.
//!
//! The crate provides the full search stack: tabular preprocessing and
//! splitting ([`data`]), a deterministic CART decision tree used as the
//! induction algorithm ([`tree`]), wrapper fitness evaluation with budget
//! accounting ([`fitness`]), the CHC genetic algorithm ([`chc`]), the
//! multi-level surrogate orchestrator ([`saga`]), and the cost-model and
//! statistics routines used to analyse runs ([`stats`]).
//!
//! Everything is deterministic given a seed: identical inputs and seeds
//! produce bit-identical runs. The crate is `no_std`-compatible (with
//! `alloc`); file IO, wall clocks, and the CLI live in the companion
//! `saga-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod chc;
pub mod clock;
pub mod data;
pub mod error;
pub mod fitness;
pub mod mask;
pub mod report;
pub mod saga;
pub mod seed;
pub mod stats;
pub mod tree;

pub use chc::{
    hux_crossover, run_chc, ChcConfig, ChcEngine, HuxOutcome, Individual, InitMode, Population,
};
pub use clock::{Clock, NullClock};
pub use data::{
    preprocess, shuffle_split, subsample, RawColumn, RawTable, RawValue, SampleHandle, SplitData,
    TableData, TrainView,
};
pub use error::{DataError, GaError};
pub use fitness::{majority_baseline, EvalBudgetCounter, FitnessFn, FitnessValue, TreeFitness};
pub use mask::FeatureMask;
pub use report::{compare_runs, time_to_match, LevelLog, MatchPoint, RunReport, TraceEvent};
pub use saga::{build_schedule, run_saga, SagaConfig, SamplingSchedule};
pub use stats::{
    alignment_grid, moving_average, resample_step, schedule_cost_ratio, student_t_two_sided,
    summarize, summarize_runs, welch_t, CostModel, RunSummary, Summary,
};
pub use tree::{fit_tree, predict, TreeModel};
