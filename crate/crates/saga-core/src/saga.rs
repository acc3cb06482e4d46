//! The surrogate-assisted orchestrator: a geometric schedule of data
//! fractions, CHC runs against progressively larger surrogates, evolution
//! control against the full model, perseverance repetitions, population
//! reduction, migration of the incumbent, and a final full-fidelity stage.
//!
//! Levels count down from `b` (smallest sample) to 1 (half the data);
//! level 0 in logs denotes the final stage on all training rows. The
//! incumbent — the best mask ranked by full-model ("true") fitness — is the
//! only state carried between repetitions.

use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::chc::{rank, ChcConfig, ChcEngine, Individual, InitMode};
use crate::clock::Clock;
use crate::data::{subsample, SplitData, TrainView};
use crate::error::GaError;
use crate::fitness::{EvalBudgetCounter, FitnessFn, TreeFitness};
use crate::mask::FeatureMask;
use crate::report::{snapshot, LevelLog, RunReport, TraceEvent};
use crate::seed::{self, tag};
use crate::tree::fit_tree;

/// Geometric sample-size schedule: `floor(N / a^i)` rows for levels
/// `i = b..1`, each clamped to at least 2 rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSchedule {
    pub base: f64,
    pub levels: usize,
    /// Ascending: `sizes[0]` is the smallest (level `b`).
    pub sizes: Vec<usize>,
}

impl SamplingSchedule {
    /// Sample size for level `i` in `b..=1`.
    pub fn size_for_level(&self, level: usize) -> usize {
        self.sizes[self.levels - level]
    }
}

/// Builds the schedule, rejecting configurations whose clamped sizes fail
/// to increase strictly (too little data for the requested depth).
pub fn build_schedule(n: usize, a: f64, b: usize) -> Result<SamplingSchedule, GaError> {
    if b < 1 {
        return Err(GaError::BadConfig(
            "schedule needs at least one level".to_string(),
        ));
    }
    if a.is_nan() || a <= 1.0 {
        return Err(GaError::BadConfig(
            "schedule base must exceed 1".to_string(),
        ));
    }
    if (n as f64) < libm::pow(a, b as f64) {
        return Err(GaError::DegenerateSchedule(format!(
            "{n} rows cannot feed {b} levels at base {a}"
        )));
    }
    let mut sizes = Vec::with_capacity(b);
    for i in (1..=b).rev() {
        let raw = libm::floor(n as f64 / libm::pow(a, i as f64)) as usize;
        sizes.push(raw.max(2));
    }
    for w in sizes.windows(2) {
        if w[1] <= w[0] {
            return Err(GaError::DegenerateSchedule(format!(
                "sizes {sizes:?} are not strictly increasing"
            )));
        }
    }
    if *sizes.last().expect("b >= 1") >= n {
        return Err(GaError::DegenerateSchedule(format!(
            "largest sample {} must stay below the {n} training rows",
            sizes.last().expect("b >= 1")
        )));
    }
    Ok(SamplingSchedule {
        base: a,
        levels: b,
        sizes,
    })
}

/// All hyper-parameters of a surrogate-assisted run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default)
)]
pub struct SagaConfig {
    /// Number of surrogate levels.
    pub b: usize,
    /// Population reduction rate per level, in (0, 1].
    pub pr: f64,
    /// Generations between evolution-control checkpoints.
    pub z: usize,
    /// False-optimum prevention: evolution control on/off.
    pub fop: bool,
    /// Perseverance: repetitions per level.
    pub sp: usize,
    /// Surrogate-only: skip the final full-fidelity stage.
    pub so: bool,
    /// Initial (and final-stage) population size.
    pub p0: usize,
    /// Geometric base of the sampling schedule.
    pub a: f64,
    /// Engine parameters; `pop_size` and `seed` are overridden per run.
    pub chc: ChcConfig,
    pub seed: u64,
    /// Compatibility mode: shrink the population on every convergence
    /// event (each repetition) instead of per level.
    pub strict_pseudocode: bool,
    /// Stagnation limit of the final full-fidelity stage. Surrogate
    /// levels keep the engine's short convergence window because their
    /// models are throwaway approximations; the exploitation stage gets
    /// room for a few cataclysmic restarts instead.
    pub final_stagnation_limit: usize,
}

impl Default for SagaConfig {
    fn default() -> Self {
        Self {
            b: 4,
            pr: 0.5,
            z: 10,
            fop: true,
            sp: 1,
            so: false,
            p0: 40,
            a: 2.0,
            chc: ChcConfig::default(),
            seed: 0,
            strict_pseudocode: false,
            final_stagnation_limit: 30,
        }
    }
}

impl SagaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.b < 1 || self.z < 1 || self.sp < 1 {
            return Err(GaError::BadConfig(
                "levels, control step, and perseverance must be at least 1".to_string(),
            ));
        }
        if !(self.pr > 0.0 && self.pr <= 1.0) {
            return Err(GaError::BadConfig(
                "reduction rate must lie in (0, 1]".to_string(),
            ));
        }
        if self.a.is_nan() || self.a <= 1.0 {
            return Err(GaError::BadConfig(
                "schedule base must exceed 1".to_string(),
            ));
        }
        if self.p0 < 2 {
            return Err(GaError::BadConfig(
                "initial population must be at least 2".to_string(),
            ));
        }
        if reduced_pop_raw(self.p0, self.pr, (self.b - 1) as i32) < 2 {
            return Err(GaError::BadConfig(
                "smallest level population would round below 2".to_string(),
            ));
        }
        if self.final_stagnation_limit < 1 {
            return Err(GaError::BadConfig(
                "final-stage stagnation limit must be at least 1".to_string(),
            ));
        }
        let probe = ChcConfig {
            seed: self.seed,
            ..self.chc.clone()
        };
        probe.validate()
    }
}

/// Round-half-up of `p0 · pr^exponent`, before the floor-of-2 clamp.
fn reduced_pop_raw(p0: usize, pr: f64, exponent: i32) -> usize {
    libm::floor(p0 as f64 * libm::pow(pr, exponent as f64) + 0.5) as usize
}

/// Population size after `exponent` reductions: round-half-up of
/// `p0 · pr^exponent`, floored at 2.
fn reduced_pop(p0: usize, pr: f64, exponent: i32) -> usize {
    reduced_pop_raw(p0, pr, exponent).max(2)
}

/// Re-evaluates a surrogate's current best with the full model. The level
/// should be abandoned (`switch`) when the true fitness fails to improve
/// strictly over the previous checkpoint.
pub fn evolution_control_check<F: FitnessFn>(
    current_best: &FeatureMask,
    previous_true: f64,
    full_model: &mut F,
) -> Result<(f64, bool), GaError> {
    let mut probe = current_best.clone();
    let new_true = full_model.evaluate(&mut probe)?;
    Ok((new_true, new_true <= previous_true))
}

/// Runs one engine to convergence under a surrogate, with optional
/// evolution control every `z` generations against `full_model`.
///
/// `previous_true` carries checkpoint state in and out; `on_generation`
/// fires after every step and after every control check. Returns the
/// generations executed and whether control ended the run early.
pub fn run_level<S: FitnessFn, M: FitnessFn>(
    engine: &mut ChcEngine,
    surrogate: &mut S,
    full_model: &mut M,
    fop: bool,
    z: usize,
    previous_true: &mut f64,
    mut on_generation: impl FnMut(&ChcEngine),
) -> Result<(u64, bool), GaError> {
    let mut switched = false;
    while !engine.finished() {
        engine.step(surrogate)?;
        on_generation(engine);
        if fop && engine.generation().is_multiple_of(z) {
            let (new_true, switch) =
                evolution_control_check(&engine.best().mask, *previous_true, full_model)?;
            *previous_true = new_true;
            on_generation(engine);
            if switch {
                switched = true;
                break;
            }
        }
    }
    Ok((engine.generation() as u64, switched))
}

/// Keeps the better of the incumbent and a candidate, ranked by true
/// fitness with ties to fewer features, then the smaller bit string.
fn merge_incumbent(incumbent: &mut Option<Individual>, candidate: Individual) {
    let replace = match incumbent {
        None => true,
        Some(current) => rank(&candidate, current).is_lt(),
    };
    if replace {
        *incumbent = Some(candidate);
    }
}

/// Result of the surrogate stage alone.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateStageOutcome {
    /// The migrated best, `g'`.
    pub g_prime: FeatureMask,
    /// Full-model validation accuracy of `g'`.
    pub g_prime_true_fitness: f64,
    pub trace: Vec<TraceEvent>,
    pub levels: Vec<LevelLog>,
    pub counters: EvalBudgetCounter,
    pub generations: u64,
}

struct StageCtx<'a> {
    split: &'a SplitData,
    cfg: &'a SagaConfig,
    counter: Rc<RefCell<EvalBudgetCounter>>,
    clock: &'a dyn Clock,
    trace: Vec<TraceEvent>,
    levels: Vec<LevelLog>,
    generations: u64,
}

/// Iterates levels `b..1`, running `sp` repetitions per level — fresh
/// sample, fresh population plus the incumbent migrant — and migrating the
/// best candidate by true fitness. Returns the incumbent.
fn surrogate_levels(
    ctx: &mut StageCtx<'_>,
    full_model: &mut TreeFitness<'_>,
) -> Result<Individual, GaError> {
    let cfg = ctx.cfg;
    let n_train = ctx.split.train.n_instances();
    let k = ctx.split.train.n_features();
    let schedule = build_schedule(n_train, cfg.a, cfg.b)?;

    let mut incumbent: Option<Individual> = None;
    let mut rep_index: u64 = 0;
    for level in (1..=cfg.b).rev() {
        let sample_size = schedule.size_for_level(level);
        for repetition in 0..cfg.sp {
            let exponent = if cfg.strict_pseudocode {
                rep_index as i32
            } else {
                (cfg.b - level) as i32
            };
            let pop_size = reduced_pop(cfg.p0, cfg.pr, exponent);
            let sample = subsample(
                &ctx.split.train,
                sample_size,
                level,
                seed::derive(cfg.seed, tag::SAMPLE, rep_index),
            )?;
            let mut surrogate = TreeFitness::new(
                TrainView::sampled(&ctx.split.train, &sample),
                &ctx.split.validation,
                ctx.counter.clone(),
                seed::derive(cfg.seed, tag::REPAIR, rep_index),
            );
            let mode = match &incumbent {
                None => InitMode::Random,
                Some(best) => InitMode::Migrant(best.mask.clone()),
            };
            let chc_cfg = ChcConfig {
                pop_size,
                ..cfg.chc.clone()
            };
            let before = *ctx.counter.borrow();
            let mut engine = ChcEngine::new(
                &chc_cfg,
                k,
                mode,
                seed::derive(cfg.seed, tag::ENGINE, rep_index),
                &mut surrogate,
            )?;

            // The trace reports the true fitness of the *retained* best;
            // candidates only enter it once ranked at repetition end.
            let incumbent_true = incumbent.as_ref().map_or(0.0, |i| i.fitness);
            ctx.trace
                .push(snapshot(&ctx.counter.borrow(), ctx.clock, incumbent_true));
            let mut previous_true = incumbent.as_ref().map_or(f64::NEG_INFINITY, |i| i.fitness);
            let (generations, switched) = {
                let counter = &ctx.counter;
                let clock = ctx.clock;
                let trace = &mut ctx.trace;
                run_level(
                    &mut engine,
                    &mut surrogate,
                    full_model,
                    cfg.fop,
                    cfg.z,
                    &mut previous_true,
                    |_| trace.push(snapshot(&counter.borrow(), clock, incumbent_true)),
                )?
            };
            ctx.generations += generations;

            let mut candidate_mask = engine.best().mask.clone();
            let candidate_true = full_model.evaluate(&mut candidate_mask)?;
            merge_incumbent(
                &mut incumbent,
                Individual {
                    mask: candidate_mask,
                    fitness: candidate_true,
                },
            );

            let after = *ctx.counter.borrow();
            ctx.levels.push(LevelLog {
                level,
                repetition,
                pop_size,
                sample_size,
                generations,
                surrogate_evals: after.surrogate_evals - before.surrogate_evals,
                full_evals: after.full_evals - before.full_evals,
                instances_processed: after.instances_processed - before.instances_processed,
                candidate_true_fitness: candidate_true,
                switched_early: switched,
            });
            let retained = incumbent.as_ref().expect("merge always sets the incumbent");
            ctx.trace
                .push(snapshot(&after, ctx.clock, retained.fitness));
            rep_index += 1;
        }
    }
    Ok(incumbent.expect("b >= 1 and sp >= 1 guarantee at least one candidate"))
}

fn make_ctx<'a>(
    split: &'a SplitData,
    cfg: &'a SagaConfig,
    clock: &'a dyn Clock,
) -> (StageCtx<'a>, Rc<RefCell<EvalBudgetCounter>>) {
    let counter = EvalBudgetCounter::shared();
    (
        StageCtx {
            split,
            cfg,
            counter: counter.clone(),
            clock,
            trace: Vec::new(),
            levels: Vec::new(),
            generations: 0,
        },
        counter,
    )
}

fn full_model_evaluator<'a>(
    split: &'a SplitData,
    cfg: &SagaConfig,
    counter: Rc<RefCell<EvalBudgetCounter>>,
) -> TreeFitness<'a> {
    TreeFitness::new(
        TrainView::full(&split.train),
        &split.validation,
        counter,
        seed::derive(cfg.seed, tag::REPAIR, u64::MAX),
    )
}

/// The surrogate stage alone: levels, perseverance, migration. The final
/// full-fidelity stage is not entered.
pub fn run_surrogate_stage(
    split: &SplitData,
    cfg: &SagaConfig,
    clock: &dyn Clock,
) -> Result<SurrogateStageOutcome, GaError> {
    cfg.validate()?;
    let (mut ctx, counter) = make_ctx(split, cfg, clock);
    let mut full_model = full_model_evaluator(split, cfg, counter.clone());
    let incumbent = surrogate_levels(&mut ctx, &mut full_model)?;
    let counters = *counter.borrow();
    Ok(SurrogateStageOutcome {
        g_prime: incumbent.mask,
        g_prime_true_fitness: incumbent.fitness,
        trace: ctx.trace,
        levels: ctx.levels,
        counters,
        generations: ctx.generations,
    })
}

fn arm_name(cfg: &SagaConfig) -> String {
    let mut parts: Vec<&str> = Vec::new();
    if cfg.so {
        parts.push("so=1");
    }
    if !cfg.fop {
        parts.push("fop=0");
    }
    if cfg.strict_pseudocode {
        parts.push("strict");
    }
    if parts.is_empty() {
        "saga".to_string()
    } else {
        format!("saga[{}]", parts.join(","))
    }
}

/// A complete surrogate-assisted run: surrogate stage, then (unless
/// surrogate-only) a full-data engine seeded in frequency mode by `g'`.
/// The returned best is the overall winner by true fitness.
pub fn run_saga(
    split: &SplitData,
    cfg: &SagaConfig,
    dataset_id: &str,
    clock: &dyn Clock,
) -> Result<RunReport, GaError> {
    cfg.validate()?;
    let (mut ctx, counter) = make_ctx(split, cfg, clock);
    let mut full_model = full_model_evaluator(split, cfg, counter.clone());
    let incumbent = surrogate_levels(&mut ctx, &mut full_model)?;

    let overall = if cfg.so {
        incumbent
    } else {
        let n_train = split.train.n_instances();
        let final_cfg = ChcConfig {
            pop_size: cfg.p0,
            stagnation_limit: cfg.final_stagnation_limit,
            ..cfg.chc.clone()
        };
        let before = *counter.borrow();
        let mut engine = ChcEngine::new(
            &final_cfg,
            split.train.n_features(),
            InitMode::Frequency(incumbent.mask.clone()),
            seed::derive(cfg.seed, tag::FINAL_STAGE, 0),
            &mut full_model,
        )?;
        // The migrant is in the population and evaluated by the full
        // model, so the engine's best fitness is already a true fitness
        // at or above the incumbent's.
        ctx.trace
            .push(snapshot(&counter.borrow(), clock, engine.best().fitness));
        while !engine.finished() {
            engine.step(&mut full_model)?;
            ctx.trace
                .push(snapshot(&counter.borrow(), clock, engine.best().fitness));
        }
        let final_best = engine.best().clone();
        let after = *counter.borrow();
        ctx.generations += engine.generation() as u64;
        ctx.levels.push(LevelLog {
            level: 0,
            repetition: 0,
            pop_size: cfg.p0,
            sample_size: n_train,
            generations: engine.generation() as u64,
            surrogate_evals: after.surrogate_evals - before.surrogate_evals,
            full_evals: after.full_evals - before.full_evals,
            instances_processed: after.instances_processed - before.instances_processed,
            candidate_true_fitness: final_best.fitness,
            switched_early: false,
        });
        let mut overall = Some(incumbent);
        merge_incumbent(&mut overall, final_best);
        overall.expect("incumbent present")
    };

    // Reporting-only: excluded from the budget counters.
    let model = fit_tree(&TrainView::full(&split.train), &overall.mask)?;
    let test_accuracy = model.accuracy(&split.test)?;
    let counters = *counter.borrow();

    Ok(RunReport {
        dataset_id: dataset_id.to_string(),
        arm: arm_name(cfg),
        run_seed: cfg.seed,
        split_seed: split.split_seed,
        best_mask: overall.mask,
        best_validation_accuracy: overall.fitness,
        test_accuracy,
        generations: ctx.generations,
        counters,
        levels: ctx.levels,
        trace: ctx.trace,
        elapsed_secs: clock.elapsed_secs(),
    })
}
