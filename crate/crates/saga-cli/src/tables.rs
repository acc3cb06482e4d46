//! File artifacts: summary JSON, trace CSVs, comparison tables, and
//! plot-ready trace curves.
//!
//! `summary.json` holds only deterministic fields (masks, accuracies,
//! counters, level logs, counter-indexed traces), so re-running the same
//! configuration reproduces it byte for byte. Wall-clock readings live in
//! `timing.json` and in the per-run `trace_<r>.csv` files, which are not
//! byte-stable by nature. Every table is recomputable from the persisted
//! summaries alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use saga_core::{
    alignment_grid, compare_runs, moving_average, resample_step, student_t_two_sided, summarize,
    summarize_runs, welch_t, EvalBudgetCounter, FeatureMask, LevelLog, RunReport, Summary,
    TraceEvent,
};

use crate::config::ExperimentConfig;
use crate::harness::ExperimentResult;
use crate::CliError;

/// Grid resolution of `fig_trace.csv`.
pub const FIG_POINTS: usize = 200;
/// Default smoothing window of `fig_trace.csv`.
pub const FIG_WINDOW: usize = 5;

/// One trace event without its wall-clock reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub instances_processed: u64,
    pub surrogate_evals: u64,
    pub full_evals: u64,
    pub best_true_fitness: f64,
}

/// One run's deterministic outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDoc {
    pub run_seed: u64,
    /// Bit string, one character per feature.
    pub best_mask: String,
    pub best_validation_accuracy: f64,
    pub test_accuracy: f64,
    pub generations: u64,
    pub counters: EvalBudgetCounter,
    pub levels: Vec<LevelLog>,
    pub trace: Vec<TraceDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateDoc {
    pub validation_accuracy: Summary,
    pub test_accuracy: Summary,
    pub instances_processed: Summary,
}

/// Deterministic per-arm result document (`summary.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub dataset_id: String,
    /// Arm label as reported by the runs, e.g. `chc` or `saga[so=1]`.
    pub arm: String,
    pub split_seed: u64,
    pub run_seed_base: u64,
    pub n_features: usize,
    /// Test accuracy of always predicting the training majority class.
    pub majority_test_accuracy: f64,
    pub aggregate: AggregateDoc,
    pub runs: Vec<RunDoc>,
}

/// Wall-clock sidecar (`timing.json`); informational, not byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingDoc {
    pub per_run_secs: Vec<f64>,
    pub aggregate: Summary,
}

/// One arm's reports plus the labels table writers need.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmData {
    /// Directory-safe name (`baseline`, `chc`, `saga`).
    pub dir_name: String,
    /// Row label; carries variants such as `saga[so=1]`.
    pub label: String,
    pub reports: Vec<RunReport>,
}

fn doc_from_reports(
    result: &ExperimentResult,
    label: &str,
    reports: &[RunReport],
) -> Result<SummaryDoc, CliError> {
    let summary = summarize_runs(reports)?;
    Ok(SummaryDoc {
        dataset_id: result.dataset_id.clone(),
        arm: label.to_string(),
        split_seed: result.split_seed,
        run_seed_base: reports.first().map_or(0, |r| r.run_seed),
        n_features: result.n_features,
        majority_test_accuracy: result.majority_test_accuracy,
        aggregate: AggregateDoc {
            validation_accuracy: summary.validation_accuracy,
            test_accuracy: summary.test_accuracy,
            instances_processed: summary.instances_processed,
        },
        runs: reports
            .iter()
            .map(|r| RunDoc {
                run_seed: r.run_seed,
                best_mask: r.best_mask.to_string(),
                best_validation_accuracy: r.best_validation_accuracy,
                test_accuracy: r.test_accuracy,
                generations: r.generations,
                counters: r.counters,
                levels: r.levels.clone(),
                trace: r
                    .trace
                    .iter()
                    .map(|e| TraceDoc {
                        instances_processed: e.instances_processed,
                        surrogate_evals: e.surrogate_evals,
                        full_evals: e.full_evals,
                        best_true_fitness: e.best_true_fitness,
                    })
                    .collect(),
            })
            .collect(),
    })
}

fn reports_from_doc(doc: &SummaryDoc) -> Result<Vec<RunReport>, CliError> {
    doc.runs
        .iter()
        .map(|run| {
            let bits: Vec<bool> = run
                .best_mask
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(CliError::Config(format!(
                        "bad mask character `{other}` in summary"
                    ))),
                })
                .collect::<Result<_, _>>()?;
            Ok(RunReport {
                dataset_id: doc.dataset_id.clone(),
                arm: doc.arm.clone(),
                run_seed: run.run_seed,
                split_seed: doc.split_seed,
                best_mask: FeatureMask::from_bits(bits),
                best_validation_accuracy: run.best_validation_accuracy,
                test_accuracy: run.test_accuracy,
                generations: run.generations,
                counters: run.counters,
                levels: run.levels.clone(),
                trace: run
                    .trace
                    .iter()
                    .map(|e| TraceEvent {
                        elapsed_secs: 0.0,
                        instances_processed: e.instances_processed,
                        surrogate_evals: e.surrogate_evals,
                        full_evals: e.full_evals,
                        best_true_fitness: e.best_true_fitness,
                    })
                    .collect(),
                elapsed_secs: 0.0,
            })
        })
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `summary.json` (deterministic) and `timing.json` (wall-clock)
/// for one arm.
pub fn write_arm_dir(
    dir: &Path,
    result: &ExperimentResult,
    label: &str,
    reports: &[RunReport],
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let doc = doc_from_reports(result, label, reports)?;
    write_json(&dir.join("summary.json"), &doc)?;
    let per_run_secs: Vec<f64> = reports.iter().map(|r| r.elapsed_secs).collect();
    let timing = TimingDoc {
        aggregate: summarize(&per_run_secs)?,
        per_run_secs,
    };
    write_json(&dir.join("timing.json"), &timing)?;
    for (i, report) in reports.iter().enumerate() {
        if !report.trace.is_empty() {
            write_trace_csv(&dir.join(format!("trace_{i}.csv")), &report.trace)?;
        }
    }
    Ok(())
}

/// Loads one arm directory back into reports; wall-clock readings are
/// restored from `timing.json` when present and zero otherwise.
pub fn load_arm_dir(dir: &Path) -> Result<ArmData, CliError> {
    let summary_path = dir.join("summary.json");
    let text = fs::read_to_string(&summary_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", summary_path.display())))?;
    let doc: SummaryDoc = serde_json::from_str(&text)?;
    let mut reports = reports_from_doc(&doc)?;
    if let Ok(timing_text) = fs::read_to_string(dir.join("timing.json")) {
        let timing: TimingDoc = serde_json::from_str(&timing_text)?;
        for (report, secs) in reports.iter_mut().zip(&timing.per_run_secs) {
            report.elapsed_secs = *secs;
        }
    }
    let dir_name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| doc.arm.clone());
    Ok(ArmData {
        dir_name,
        label: doc.arm.clone(),
        reports,
    })
}

/// Per-run trace CSV: one row per recorded event.
pub fn write_trace_csv(path: &Path, trace: &[TraceEvent]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "timestamp",
        "instances_processed",
        "surrogate_evals",
        "full_evals",
        "best_true_fitness",
    ])
    .map_err(csv_failed)?;
    for e in trace {
        w.write_record([
            e.elapsed_secs.to_string(),
            e.instances_processed.to_string(),
            e.surrogate_evals.to_string(),
            e.full_evals.to_string(),
            e.best_true_fitness.to_string(),
        ])
        .map_err(csv_failed)?;
    }
    w.flush()?;
    Ok(())
}

/// Two-sided paired t-test on per-pair differences; `None` below two
/// pairs. Zero variance follows the two-sample convention: equal to the
/// reference exactly gives (0, 1), a constant nonzero difference gets a
/// floored variance.
pub fn paired_t(diffs: &[f64]) -> Option<(f64, f64)> {
    if diffs.len() < 2 {
        return None;
    }
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let mut var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        if mean == 0.0 {
            return Some((0.0, 1.0));
        }
        var = 1e-12;
    }
    let t = mean / (var / n).sqrt();
    Some((t, student_t_two_sided(t, n - 1.0)))
}

fn metric_columns(
    reference: &[RunReport],
    row: &[RunReport],
    metric: &dyn Fn(&RunReport) -> f64,
) -> (String, String) {
    let a: Vec<f64> = reference.iter().map(metric).collect();
    let b: Vec<f64> = row.iter().map(metric).collect();
    let unpaired = welch_t(&a, &b)
        .map(|(_, p)| p.to_string())
        .unwrap_or_default();
    let paired = if a.len() == b.len() {
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        paired_t(&diffs)
            .map(|(_, p)| p.to_string())
            .unwrap_or_default()
    } else {
        String::new()
    };
    (unpaired, paired)
}

/// Summary table: one row per arm, significance columns against the first
/// arm (whose own cells stay empty).
pub fn write_table(path: &Path, arms: &[ArmData]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "arm",
        "runs",
        "validation_mean",
        "validation_std",
        "test_mean",
        "test_std",
        "instances_mean",
        "instances_std",
        "secs_mean",
        "secs_std",
        "winner",
        "p_test_unpaired",
        "p_test_paired",
        "p_instances_unpaired",
        "p_instances_paired",
    ])
    .map_err(csv_failed)?;

    let summaries: Vec<_> = arms
        .iter()
        .map(|arm| summarize_runs(&arm.reports).map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    let best_test = summaries
        .iter()
        .map(|s: &saga_core::RunSummary| s.test_accuracy.mean)
        .fold(f64::NEG_INFINITY, f64::max);

    for (i, (arm, summary)) in arms.iter().zip(&summaries).enumerate() {
        let (p_test_u, p_test_p, p_inst_u, p_inst_p) = if i == 0 {
            Default::default()
        } else {
            let (tu, tp) = metric_columns(&arms[0].reports, &arm.reports, &|r| r.test_accuracy);
            let (iu, ip) = metric_columns(&arms[0].reports, &arm.reports, &|r| {
                r.counters.instances_processed as f64
            });
            (tu, tp, iu, ip)
        };
        w.write_record([
            arm.label.clone(),
            arm.reports.len().to_string(),
            summary.validation_accuracy.mean.to_string(),
            summary.validation_accuracy.std.to_string(),
            summary.test_accuracy.mean.to_string(),
            summary.test_accuracy.std.to_string(),
            summary.instances_processed.mean.to_string(),
            summary.instances_processed.std.to_string(),
            summary.elapsed_secs.mean.to_string(),
            summary.elapsed_secs.std.to_string(),
            u8::from(summary.test_accuracy.mean == best_test).to_string(),
            p_test_u,
            p_test_p,
            p_inst_u,
            p_inst_p,
        ])
        .map_err(csv_failed)?;
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready smoothed best-fitness curves: every run is resampled onto a
/// shared instance grid (step interpolation, hold-last), smoothed with a
/// trailing moving average, then aggregated to mean ± std per arm.
pub fn write_fig_trace(path: &Path, arms: &[ArmData], window: usize) -> Result<(), CliError> {
    let max_x = arms
        .iter()
        .flat_map(|arm| &arm.reports)
        .filter_map(|r| r.trace.last())
        .map(|e| e.instances_processed as f64)
        .fold(0.0f64, f64::max);
    let mut w = csv_writer(path)?;
    w.write_record(["x", "mean", "std", "label"])
        .map_err(csv_failed)?;
    if max_x <= 0.0 {
        w.flush()?;
        return Ok(());
    }
    let grid = alignment_grid(max_x, FIG_POINTS)?;

    for arm in arms {
        if arm.reports.iter().any(|r| r.trace.is_empty()) {
            continue;
        }
        let curves: Vec<Vec<f64>> = arm
            .reports
            .iter()
            .map(|r| {
                let xs: Vec<f64> = r
                    .trace
                    .iter()
                    .map(|e| e.instances_processed as f64)
                    .collect();
                let ys: Vec<f64> = r.trace.iter().map(|e| e.best_true_fitness).collect();
                let resampled = resample_step(&xs, &ys, &grid)?;
                moving_average(&resampled, window).map_err(CliError::from)
            })
            .collect::<Result<_, _>>()?;
        for (gi, &x) in grid.iter().enumerate() {
            let column: Vec<f64> = curves.iter().map(|c| c[gi]).collect();
            let stat = summarize(&column)?;
            w.write_record([
                x.to_string(),
                stat.mean.to_string(),
                stat.std.to_string(),
                arm.label.clone(),
            ])
            .map_err(csv_failed)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Time-to-match table: for every reference/baseline run pair, where the
/// baseline's trace first reaches the reference run's final fitness.
/// Columns are counter-based; wall-clock comparisons stay in `timing.json`.
pub fn write_compare(
    path: &Path,
    reference: &ArmData,
    baselines: &[&ArmData],
) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "reference_arm",
        "baseline_arm",
        "pair",
        "target_fitness",
        "matched",
        "instances_at_match",
        "full_evals_at_match",
        "baseline_final_instances",
    ])
    .map_err(csv_failed)?;
    for baseline in baselines {
        let matches = compare_runs(&reference.reports, &baseline.reports)?;
        for (pair, (reference_run, matched)) in reference.reports.iter().zip(&matches).enumerate() {
            let baseline_run = &baseline.reports[pair];
            let (instances, full_evals) = matched
                .as_ref()
                .map(|m| (m.instances_processed.to_string(), m.full_evals.to_string()))
                .unwrap_or_default();
            w.write_record([
                reference.label.clone(),
                baseline.label.clone(),
                pair.to_string(),
                reference_run.best_validation_accuracy.to_string(),
                u8::from(matched.is_some()).to_string(),
                instances,
                full_evals,
                baseline_run.counters.instances_processed.to_string(),
            ])
            .map_err(csv_failed)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Emits the full artifact set for an experiment and returns the paths
/// written: per-arm directories plus top-level tables, a comparison when
/// at least two equally sized arms exist, and an echo of the effective
/// configuration.
pub fn write_all(
    result: &ExperimentResult,
    cfg: &ExperimentConfig,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let mut written = Vec::new();

    let mut arm_data = Vec::new();
    for arm_result in &result.arms {
        let dir_name = arm_result.arm.as_str().to_string();
        let label = arm_result
            .reports
            .first()
            .map_or_else(|| dir_name.clone(), |r| r.arm.clone());
        let dir = cfg.output_dir.join(&dir_name);
        write_arm_dir(&dir, result, &label, &arm_result.reports)?;
        written.push(dir.join("summary.json"));
        arm_data.push(ArmData {
            dir_name,
            label,
            reports: arm_result.reports.clone(),
        });
    }

    let config_path = cfg.output_dir.join("config.json");
    write_json(&config_path, cfg)?;
    written.push(config_path);

    let table_path = cfg.output_dir.join("table.csv");
    write_table(&table_path, &arm_data)?;
    written.push(table_path);

    let fig_path = cfg.output_dir.join("fig_trace.csv");
    write_fig_trace(&fig_path, &arm_data, FIG_WINDOW)?;
    written.push(fig_path);

    if arm_data.len() >= 2 {
        let reference = &arm_data[0];
        let comparable: Vec<&ArmData> = arm_data[1..]
            .iter()
            .filter(|arm| arm.reports.len() == reference.reports.len())
            .collect();
        if !comparable.is_empty() {
            let compare_path = cfg.output_dir.join("compare.csv");
            write_compare(&compare_path, reference, &comparable)?;
            written.push(compare_path);
        }
    }
    Ok(written)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn csv_failed(err: csv::Error) -> CliError {
    CliError::Config(format!("csv write failed: {err}"))
}
