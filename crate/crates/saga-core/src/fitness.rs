//! Wrapper fitness: train a tree on a (possibly subsampled) training view,
//! score accuracy on the full validation partition.
//!
//! Every evaluator owns a memoization cache, a seeded repair stream for
//! all-zero masks, and a handle to a shared budget counter. Cache hits cost
//! nothing; misses count one model build plus the number of training rows
//! consumed by it.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use core::cell::RefCell;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{TableData, TrainView};
use crate::error::GaError;
use crate::mask::FeatureMask;
use crate::tree::fit_tree;

/// Wrapper fitness is validation accuracy in `[0, 1]`.
pub type FitnessValue = f64;

/// Model-build and instance-throughput totals, shared across the
/// evaluators of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalBudgetCounter {
    /// Model builds on a subsampled training view.
    pub surrogate_evals: u64,
    /// Model builds on the full training partition.
    pub full_evals: u64,
    /// Training rows consumed across all builds.
    pub instances_processed: u64,
}

impl EvalBudgetCounter {
    pub fn total_evals(&self) -> u64 {
        self.surrogate_evals + self.full_evals
    }

    /// Fresh shared handle for a run.
    pub fn shared() -> Rc<RefCell<EvalBudgetCounter>> {
        Rc::new(RefCell::new(EvalBudgetCounter::default()))
    }
}

/// A fitness function over feature masks. `evaluate` takes the mask
/// mutably so an all-zero mask can be repaired in place and the caller
/// keeps the repaired genome.
pub trait FitnessFn {
    fn n_features(&self) -> usize;
    fn evaluate(&mut self, mask: &mut FeatureMask) -> Result<FitnessValue, GaError>;
}

/// Tree-backed wrapper fitness over a fixed training view.
pub struct TreeFitness<'a> {
    train: TrainView<'a>,
    validation: &'a TableData,
    counter: Rc<RefCell<EvalBudgetCounter>>,
    cache: BTreeMap<FeatureMask, FitnessValue>,
    repair_rng: ChaCha8Rng,
}

impl<'a> TreeFitness<'a> {
    pub fn new(
        train: TrainView<'a>,
        validation: &'a TableData,
        counter: Rc<RefCell<EvalBudgetCounter>>,
        repair_seed: u64,
    ) -> Self {
        Self {
            train,
            validation,
            counter,
            cache: BTreeMap::new(),
            repair_rng: ChaCha8Rng::seed_from_u64(repair_seed),
        }
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// True when misses count against the full-model budget.
    pub fn is_full_model(&self) -> bool {
        self.train.is_full()
    }
}

impl FitnessFn for TreeFitness<'_> {
    fn n_features(&self) -> usize {
        self.train.n_features()
    }

    fn evaluate(&mut self, mask: &mut FeatureMask) -> Result<FitnessValue, GaError> {
        if mask.len() != self.train.n_features() {
            return Err(GaError::MaskLengthMismatch {
                left: self.train.n_features(),
                right: mask.len(),
            });
        }
        if mask.count_ones() == 0 {
            let bit = self.repair_rng.gen_range(0..mask.len());
            mask.set(bit, true);
        }
        if let Some(&hit) = self.cache.get(mask) {
            return Ok(hit);
        }

        let model = fit_tree(&self.train, mask)?;
        let value = model.accuracy(self.validation)?;
        {
            let mut counter = self.counter.borrow_mut();
            if self.train.is_full() {
                counter.full_evals += 1;
            } else {
                counter.surrogate_evals += 1;
            }
            counter.instances_processed += self.train.n_rows() as u64;
        }
        self.cache.insert(mask.clone(), value);
        Ok(value)
    }
}

/// Accuracy of always predicting the training partition's most frequent
/// class (ties to the smallest class id) on `eval`.
pub fn majority_baseline(train: &TableData, eval: &TableData) -> f64 {
    let counts = crate::data::class_counts(train.labels(), train.n_classes());
    let mut majority = 0usize;
    for c in 1..counts.len() {
        if counts[c] > counts[majority] {
            majority = c;
        }
    }
    let hits = eval.labels().iter().filter(|&&l| l == majority).count();
    hits as f64 / eval.n_instances() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::subsample;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Feature 0 equals the label; feature 1 is noise-like but fixed.
    fn separable(n: usize) -> TableData {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let label = i % 2;
            features.push(label as f64);
            features.push(((i * 7) % 5) as f64);
            labels.push(label);
        }
        TableData::new(features, labels, 2, 2).unwrap()
    }

    #[test]
    fn separable_mask_scores_perfectly() {
        let train = separable(20);
        let val = separable(10);
        let counter = EvalBudgetCounter::shared();
        let mut fitness = TreeFitness::new(TrainView::full(&train), &val, counter.clone(), 1);
        let mut mask = FeatureMask::from_bits(vec![true, false]);
        assert_eq!(fitness.evaluate(&mut mask).unwrap(), 1.0);
        assert_eq!(counter.borrow().full_evals, 1);
        assert_eq!(counter.borrow().surrogate_evals, 0);
        assert_eq!(counter.borrow().instances_processed, 20);
    }

    #[test]
    fn cache_hit_increments_nothing() {
        let train = separable(20);
        let val = separable(10);
        let counter = EvalBudgetCounter::shared();
        let mut fitness = TreeFitness::new(TrainView::full(&train), &val, counter.clone(), 1);
        let mut mask = FeatureMask::ones(2);
        let first = fitness.evaluate(&mut mask).unwrap();
        let again = fitness.evaluate(&mut mask.clone()).unwrap();
        assert_eq!(first, again);
        assert_eq!(counter.borrow().full_evals, 1);
        assert_eq!(counter.borrow().instances_processed, 20);
        assert_eq!(fitness.cache_len(), 1);
    }

    #[test]
    fn sampled_view_counts_as_surrogate_with_sample_rows() {
        let train = separable(40);
        let val = separable(10);
        let handle = subsample(&train, 10, 1, 3).unwrap();
        let counter = EvalBudgetCounter::shared();
        let mut fitness = TreeFitness::new(
            TrainView::sampled(&train, &handle),
            &val,
            counter.clone(),
            1,
        );
        let mut mask = FeatureMask::ones(2);
        fitness.evaluate(&mut mask).unwrap();
        assert_eq!(counter.borrow().surrogate_evals, 1);
        assert_eq!(counter.borrow().full_evals, 0);
        assert_eq!(counter.borrow().instances_processed, 10);
        assert!(!fitness.is_full_model());
    }

    #[test]
    fn empty_mask_is_repaired_in_place() {
        let train = separable(20);
        let val = separable(10);
        let counter = EvalBudgetCounter::shared();
        let mut fitness = TreeFitness::new(TrainView::full(&train), &val, counter.clone(), 9);
        let mut mask = FeatureMask::zeros(2);
        fitness.evaluate(&mut mask).unwrap();
        assert_eq!(mask.count_ones(), 1, "repair must set exactly one bit");
        assert_eq!(counter.borrow().full_evals, 1);
    }

    #[test]
    fn repair_stream_is_seed_deterministic() {
        let train = separable(20);
        let val = separable(10);
        let pick_bit = |seed: u64| {
            let counter = EvalBudgetCounter::shared();
            let mut fitness = TreeFitness::new(TrainView::full(&train), &val, counter, seed);
            let mut mask = FeatureMask::zeros(2);
            fitness.evaluate(&mut mask).unwrap();
            let bit = mask.selected().next().unwrap();
            bit
        };
        assert_eq!(pick_bit(42), pick_bit(42));
    }

    #[test]
    fn mask_length_mismatch_is_an_error() {
        let train = separable(20);
        let val = separable(10);
        let counter = EvalBudgetCounter::shared();
        let mut fitness = TreeFitness::new(TrainView::full(&train), &val, counter, 1);
        let mut mask = FeatureMask::ones(5);
        assert!(matches!(
            fitness.evaluate(&mut mask),
            Err(GaError::MaskLengthMismatch { left: 2, right: 5 })
        ));
    }

    #[test]
    fn shared_counter_aggregates_across_evaluators() {
        let train = separable(40);
        let val = separable(10);
        let handle = subsample(&train, 10, 1, 3).unwrap();
        let counter = EvalBudgetCounter::shared();
        let mut surrogate = TreeFitness::new(
            TrainView::sampled(&train, &handle),
            &val,
            counter.clone(),
            1,
        );
        let mut full = TreeFitness::new(TrainView::full(&train), &val, counter.clone(), 2);
        surrogate.evaluate(&mut FeatureMask::ones(2)).unwrap();
        full.evaluate(&mut FeatureMask::ones(2)).unwrap();
        let totals = *counter.borrow();
        assert_eq!(totals.surrogate_evals, 1);
        assert_eq!(totals.full_evals, 1);
        assert_eq!(totals.instances_processed, 10 + 40);
        assert_eq!(totals.total_evals(), 2);
    }

    #[test]
    fn majority_baseline_matches_hand_count() {
        let train = TableData::new(vec![0.0, 1.0, 2.0], vec![0, 0, 1], 1, 2).unwrap();
        let eval = TableData::new(vec![0.0, 1.0, 2.0], vec![0, 1, 0], 1, 2).unwrap();
        let acc = majority_baseline(&train, &eval);
        assert!((acc - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn majority_baseline_tie_breaks_to_smallest_class() {
        let train = TableData::new(vec![0.0, 1.0], vec![1, 0], 1, 2).unwrap();
        let eval = TableData::new(vec![0.0, 1.0, 2.0, 3.0], vec![0, 0, 0, 1], 1, 2).unwrap();
        assert!((majority_baseline(&train, &eval) - 0.75).abs() < 1e-12);
    }
}
