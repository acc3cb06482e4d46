//! The CHC genetic algorithm: elitist truncation survival, incest-prevented
//! HUX crossover, no mutation, and cataclysmic reinitialization when the
//! incest threshold is exhausted.
//!
//! Two convergence notions coexist deliberately: threshold exhaustion
//! triggers a cataclysm (diversity reset), while run termination is driven
//! by a stagnation counter that cataclysms neither reset nor advance.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clock::Clock;
use crate::data::{SplitData, TrainView};
use crate::error::GaError;
use crate::fitness::{EvalBudgetCounter, FitnessFn, FitnessValue, TreeFitness};
use crate::mask::FeatureMask;
use crate::report::{snapshot, RunReport, TraceEvent};
use crate::seed::{self, tag};
use crate::tree::fit_tree;

/// One population member with its (possibly surrogate) fitness.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Individual {
    pub mask: FeatureMask,
    pub fitness: FitnessValue,
}

/// Ranking used everywhere a "best" is chosen: higher fitness first, then
/// fewer selected features, then the lexicographically smaller bit string.
pub(crate) fn rank(a: &Individual, b: &Individual) -> Ordering {
    b.fitness
        .total_cmp(&a.fitness)
        .then_with(|| a.mask.count_ones().cmp(&b.mask.count_ones()))
        .then_with(|| a.mask.cmp(&b.mask))
}

/// An evolving population plus the CHC bookkeeping attached to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
    /// Goes negative to signal a pending cataclysm.
    pub incest_threshold: i64,
    pub generation: usize,
}

impl Population {
    /// Best member under [`rank`]; does not assume the members are sorted.
    pub fn best(&self) -> &Individual {
        self.members
            .iter()
            .min_by(|a, b| rank(a, b))
            .expect("populations are never empty")
    }
}

/// How the initial population is built.
#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// Every bit set independently with its inclusion probability.
    Random,
    /// The given mask inserted verbatim; the rest random.
    Migrant(FeatureMask),
    /// The given mask inserted verbatim; the rest drawn with per-bit
    /// inclusion probability `ones(mask) / K`.
    Frequency(FeatureMask),
}

/// Engine parameters. `seed` drives the whole run: the engine stream and
/// the repair stream are derived from it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default)
)]
pub struct ChcConfig {
    pub pop_size: usize,
    /// Safety cap; stagnation normally terminates first.
    pub max_generations: usize,
    /// Consecutive non-improving generations that end a run.
    pub stagnation_limit: usize,
    /// Per-bit flip probability of a cataclysmic reinitialization.
    pub divergence_rate: f64,
    /// Per-bit inclusion probability of random initialization.
    pub init_inclusion_prob: f64,
    pub seed: u64,
}

impl Default for ChcConfig {
    fn default() -> Self {
        Self {
            pop_size: 40,
            max_generations: 10_000,
            stagnation_limit: 10,
            divergence_rate: 0.35,
            init_inclusion_prob: 0.5,
            seed: 0,
        }
    }
}

impl ChcConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.pop_size < 2 {
            return Err(GaError::BadConfig(
                "population size must be at least 2".to_string(),
            ));
        }
        if self.max_generations < 1 || self.stagnation_limit < 1 {
            return Err(GaError::BadConfig(
                "generation and stagnation limits must be at least 1".to_string(),
            ));
        }
        if !(self.divergence_rate > 0.0 && self.divergence_rate < 1.0) {
            return Err(GaError::BadConfig(
                "divergence rate must lie strictly inside (0, 1)".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.init_inclusion_prob) {
            return Err(GaError::BadConfig(
                "inclusion probability must lie in [0, 1]".to_string(),
            ));
        }
        Ok(())
    }
}

fn random_mask(k: usize, inclusion_prob: f64, rng: &mut ChaCha8Rng) -> FeatureMask {
    let mut mask = FeatureMask::zeros(k);
    for bit in 0..k {
        if rng.gen_bool(inclusion_prob) {
            mask.set(bit, true);
        }
    }
    mask
}

/// Builds and evaluates an initial population. The incest threshold starts
/// at `floor(K / 4)`.
pub fn init_population<F: FitnessFn>(
    p: usize,
    k: usize,
    mode: &InitMode,
    inclusion_prob: f64,
    rng: &mut ChaCha8Rng,
    fitness: &mut F,
) -> Result<Population, GaError> {
    if p < 2 {
        return Err(GaError::BadConfig(
            "population size must be at least 2".to_string(),
        ));
    }
    let mut masks: Vec<FeatureMask> = Vec::with_capacity(p);
    match mode {
        InitMode::Random => {
            for _ in 0..p {
                masks.push(random_mask(k, inclusion_prob, rng));
            }
        }
        InitMode::Migrant(seed_mask) => {
            if seed_mask.len() != k {
                return Err(GaError::MaskLengthMismatch {
                    left: k,
                    right: seed_mask.len(),
                });
            }
            masks.push(seed_mask.clone());
            for _ in 1..p {
                masks.push(random_mask(k, inclusion_prob, rng));
            }
        }
        InitMode::Frequency(seed_mask) => {
            if seed_mask.len() != k {
                return Err(GaError::MaskLengthMismatch {
                    left: k,
                    right: seed_mask.len(),
                });
            }
            let prob = seed_mask.count_ones() as f64 / k as f64;
            masks.push(seed_mask.clone());
            for _ in 1..p {
                masks.push(random_mask(k, prob, rng));
            }
        }
    }

    let mut members = Vec::with_capacity(p);
    for mut mask in masks {
        let value = fitness.evaluate(&mut mask)?;
        members.push(Individual {
            mask,
            fitness: value,
        });
    }
    members.sort_by(rank);
    Ok(Population {
        members,
        incest_threshold: (k / 4) as i64,
        generation: 0,
    })
}

/// Result of one attempted HUX mating.
#[derive(Debug, Clone, PartialEq)]
pub enum HuxOutcome {
    /// Parents too close: `hamming / 2` does not exceed the threshold.
    NoMating,
    Children(FeatureMask, FeatureMask),
}

/// Half-uniform crossover with incest prevention: parents mate only when
/// half their Hamming distance exceeds `threshold`, and then exchange
/// exactly `floor(d / 2)` uniformly chosen differing positions. The
/// children's mutual distance equals the parents'.
pub fn hux_crossover(
    a: &FeatureMask,
    b: &FeatureMask,
    threshold: i64,
    rng: &mut ChaCha8Rng,
) -> Result<HuxOutcome, GaError> {
    let d = a.hamming(b)?;
    if (d as i64) <= 2 * threshold {
        return Ok(HuxOutcome::NoMating);
    }
    let positions = a.differing_positions(b)?;
    let picks = rand::seq::index::sample(rng, positions.len(), positions.len() / 2);
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for idx in picks.iter() {
        let pos = positions[idx];
        let bit = c1.get(pos);
        c1.set(pos, c2.get(pos));
        c2.set(pos, bit);
    }
    Ok(HuxOutcome::Children(c1, c2))
}

/// Copy of `template` with each bit flipped with probability `rate`; redraws
/// a copy that flipped nothing, so a cataclysm cannot clone its elite.
fn divergent_copy(template: &FeatureMask, rate: f64, rng: &mut ChaCha8Rng) -> FeatureMask {
    loop {
        let mut copy = template.clone();
        for bit in 0..copy.len() {
            if rng.gen_bool(rate) {
                copy.flip(bit);
            }
        }
        if &copy != template {
            return copy;
        }
    }
}

/// Cataclysmic reinitialization: the best member survives verbatim, every
/// other member becomes a divergent copy of it, and the threshold resets to
/// `floor(rate · (1 − rate) · K)`.
pub fn cataclysm<F: FitnessFn>(
    pop: &mut Population,
    divergence_rate: f64,
    rng: &mut ChaCha8Rng,
    fitness: &mut F,
) -> Result<(), GaError> {
    let best = pop.best().clone();
    let k = best.mask.len();
    let mut members = Vec::with_capacity(pop.members.len());
    members.push(best.clone());
    for _ in 1..pop.members.len() {
        let mut mask = divergent_copy(&best.mask, divergence_rate, rng);
        let value = fitness.evaluate(&mut mask)?;
        members.push(Individual {
            mask,
            fitness: value,
        });
    }
    members.sort_by(rank);
    pop.members = members;
    pop.incest_threshold = (divergence_rate * (1.0 - divergence_rate) * k as f64) as i64;
    Ok(())
}

/// The CHC loop: pairing, HUX, truncation survival, threshold bookkeeping,
/// and cataclysms, with a stagnation counter for termination.
#[derive(Debug, Clone)]
pub struct ChcEngine {
    pop: Population,
    cfg: ChcConfig,
    n_features: usize,
    rng: ChaCha8Rng,
    stagnant: usize,
    cataclysms: usize,
}

impl ChcEngine {
    /// Builds, evaluates, and ranks the initial population.
    /// `engine_seed` feeds this engine's private random stream.
    pub fn new<F: FitnessFn>(
        cfg: &ChcConfig,
        n_features: usize,
        mode: InitMode,
        engine_seed: u64,
        fitness: &mut F,
    ) -> Result<Self, GaError> {
        cfg.validate()?;
        if n_features == 0 {
            return Err(GaError::BadConfig("need at least one feature".to_string()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(engine_seed);
        let pop = init_population(
            cfg.pop_size,
            n_features,
            &mode,
            cfg.init_inclusion_prob,
            &mut rng,
            fitness,
        )?;
        Ok(Self {
            pop,
            cfg: cfg.clone(),
            n_features,
            rng,
            stagnant: 0,
            cataclysms: 0,
        })
    }

    /// Resumes from an existing population (members need not be sorted).
    pub fn from_population(
        cfg: &ChcConfig,
        n_features: usize,
        mut pop: Population,
        engine_seed: u64,
    ) -> Result<Self, GaError> {
        cfg.validate()?;
        if pop.members.len() != cfg.pop_size {
            return Err(GaError::BadConfig(
                "population does not match the configured size".to_string(),
            ));
        }
        pop.members.sort_by(rank);
        Ok(Self {
            pop,
            cfg: cfg.clone(),
            n_features,
            rng: ChaCha8Rng::seed_from_u64(engine_seed),
            stagnant: 0,
            cataclysms: 0,
        })
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    pub fn best(&self) -> &Individual {
        &self.pop.members[0]
    }

    pub fn generation(&self) -> usize {
        self.pop.generation
    }

    pub fn cataclysms(&self) -> usize {
        self.cataclysms
    }

    pub fn is_stagnant(&self) -> bool {
        self.stagnant >= self.cfg.stagnation_limit
    }

    /// True once the run should stop: stagnation or the generation cap.
    pub fn finished(&self) -> bool {
        self.is_stagnant() || self.pop.generation >= self.cfg.max_generations
    }

    /// One generation. Returns whether the best fitness strictly improved.
    pub fn step<F: FitnessFn>(&mut self, fitness: &mut F) -> Result<bool, GaError> {
        let p = self.cfg.pop_size;
        let old_best = self.pop.members[0].fitness;

        // Pair parents by a seeded shuffle; an odd member sits out.
        let mut order: Vec<usize> = (0..p).collect();
        for i in (1..p).rev() {
            let j = self.rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut children: Vec<Individual> = Vec::new();
        for pair in order.chunks_exact(2) {
            let outcome = hux_crossover(
                &self.pop.members[pair[0]].mask,
                &self.pop.members[pair[1]].mask,
                self.pop.incest_threshold,
                &mut self.rng,
            )?;
            if let HuxOutcome::Children(mut c1, mut c2) = outcome {
                let f1 = fitness.evaluate(&mut c1)?;
                let f2 = fitness.evaluate(&mut c2)?;
                children.push(Individual {
                    mask: c1,
                    fitness: f1,
                });
                children.push(Individual {
                    mask: c2,
                    fitness: f2,
                });
            }
        }

        // Truncation survival over parents and children. The sort is
        // stable and parents come first, so a child identical to a parent
        // never displaces it.
        let mut pool: Vec<(Individual, bool)> = Vec::with_capacity(p + children.len());
        pool.extend(self.pop.members.drain(..).map(|m| (m, false)));
        pool.extend(children.into_iter().map(|c| (c, true)));
        pool.sort_by(|x, y| rank(&x.0, &y.0));
        pool.truncate(p);
        let any_child_survived = pool.iter().any(|(_, is_child)| *is_child);
        self.pop.members = pool.into_iter().map(|(m, _)| m).collect();

        if !any_child_survived {
            self.pop.incest_threshold -= 1;
        }
        self.pop.generation += 1;

        let improved = self.pop.members[0].fitness.total_cmp(&old_best) == Ordering::Greater;
        if improved {
            self.stagnant = 0;
        } else {
            self.stagnant += 1;
        }

        // Cataclysms restore diversity but neither count as a generation
        // nor touch the stagnation counter.
        if self.pop.incest_threshold < 0 {
            cataclysm(
                &mut self.pop,
                self.cfg.divergence_rate,
                &mut self.rng,
                fitness,
            )?;
            self.cataclysms += 1;
        }
        Ok(improved)
    }

    /// Steps until `finished()`.
    pub fn run<F: FitnessFn>(&mut self, fitness: &mut F) -> Result<(), GaError> {
        while !self.finished() {
            self.step(fitness)?;
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

/// A complete CHC feature-selection run against the full training
/// partition: the baseline arm of the toolkit.
pub fn run_chc(
    split: &SplitData,
    cfg: &ChcConfig,
    dataset_id: &str,
    clock: &dyn Clock,
) -> Result<RunReport, GaError> {
    let counter = EvalBudgetCounter::shared();
    let mut fitness = TreeFitness::new(
        TrainView::full(&split.train),
        &split.validation,
        counter.clone(),
        seed::derive(cfg.seed, tag::REPAIR, 0),
    );
    let mut engine = ChcEngine::new(
        cfg,
        split.train.n_features(),
        InitMode::Random,
        seed::derive(cfg.seed, tag::ENGINE, 0),
        &mut fitness,
    )?;

    let mut trace: Vec<TraceEvent> = Vec::new();
    trace.push(snapshot(&counter.borrow(), clock, engine.best().fitness));
    while !engine.finished() {
        engine.step(&mut fitness)?;
        trace.push(snapshot(&counter.borrow(), clock, engine.best().fitness));
    }

    let best = engine.best().clone();
    // Reporting-only: the budget counters exclude this fit.
    let model = fit_tree(&TrainView::full(&split.train), &best.mask)?;
    let test_accuracy = model.accuracy(&split.test)?;
    let counters = *counter.borrow();

    Ok(RunReport {
        dataset_id: dataset_id.to_string(),
        arm: "chc".to_string(),
        run_seed: cfg.seed,
        split_seed: split.split_seed,
        best_mask: best.mask,
        best_validation_accuracy: best.fitness,
        test_accuracy,
        generations: engine.generation() as u64,
        counters,
        levels: Vec::new(),
        trace,
        elapsed_secs: clock.elapsed_secs(),
    })
}
