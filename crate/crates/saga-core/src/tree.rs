//! Deterministic classification trees over masked feature sets.
//!
//! Induction uses Gini impurity with thresholds at midpoints between
//! consecutive distinct sorted values. Every tie is broken the same way on
//! every run: best-scoring split wins, then smallest feature index, then
//! smallest threshold; leaf majorities break toward the smallest class id.
//! Nodes split while they hold at least two rows, are impure, and some
//! selected feature still varies; there is no depth limit.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{TableData, TrainView};
use crate::error::GaError;
use crate::mask::FeatureMask;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted tree. Remembers the feature mask it was trained under;
/// prediction refuses tables whose width disagrees with that mask.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TreeModel {
    nodes: Vec<Node>,
    mask: FeatureMask,
    n_classes: usize,
}

impl TreeModel {
    pub fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    fn predict_row(&self, data: &TableData, row: usize) -> usize {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if data.value(row, *feature) <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Fraction of rows classified correctly.
    pub fn accuracy(&self, data: &TableData) -> Result<f64, GaError> {
        if data.n_features() != self.mask.len() {
            return Err(GaError::MaskMismatch);
        }
        let n = data.n_instances();
        let correct = (0..n)
            .filter(|&r| self.predict_row(data, r) == data.label(r))
            .count();
        Ok(correct as f64 / n as f64)
    }
}

/// Class predicted for one row. Errors when the table's width disagrees
/// with the mask the model was trained under.
pub fn predict(model: &TreeModel, data: &TableData, row: usize) -> Result<usize, GaError> {
    if data.n_features() != model.mask.len() {
        return Err(GaError::MaskMismatch);
    }
    Ok(model.predict_row(data, row))
}

/// Majority class among `rows`; ties break to the smallest class id.
fn majority(view: &TrainView<'_>, rows: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &r in rows {
        counts[view.label(r)] += 1;
    }
    let mut best = 0usize;
    for c in 1..n_classes {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

fn is_pure(view: &TrainView<'_>, rows: &[usize]) -> bool {
    let first = view.label(rows[0]);
    rows.iter().all(|&r| view.label(r) == first)
}

/// A split candidate's quality, kept in exact integer form so comparisons
/// never depend on floating-point rounding. Larger is better; the value
/// orders candidates identically to (negated) weighted Gini impurity.
#[derive(Debug, Clone, Copy)]
struct SplitScore {
    sum_sq_left: u64,
    n_left: u64,
    sum_sq_right: u64,
    n_right: u64,
}

impl SplitScore {
    /// True when `self` scores strictly higher than `other`:
    /// ssl/nl + ssr/nr compared by cross-multiplication.
    fn beats(&self, other: &SplitScore) -> bool {
        let lhs = (self.sum_sq_left as u128 * self.n_right as u128
            + self.sum_sq_right as u128 * self.n_left as u128)
            * (other.n_left as u128 * other.n_right as u128);
        let rhs = (other.sum_sq_left as u128 * other.n_right as u128
            + other.sum_sq_right as u128 * other.n_left as u128)
            * (self.n_left as u128 * self.n_right as u128);
        lhs > rhs
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: SplitScore,
}

/// Scans one feature's midpoint thresholds; returns the best candidate or
/// `None` when the feature is constant over `rows`. Ties within the feature
/// keep the smallest threshold (first encountered in the ascending sweep).
fn best_split_on_feature(
    view: &TrainView<'_>,
    rows: &[usize],
    feature: usize,
    n_classes: usize,
) -> Option<BestSplit> {
    let mut ordered: Vec<(f64, usize)> = rows
        .iter()
        .map(|&r| (view.value(r, feature), view.label(r)))
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n = ordered.len() as u64;
    let mut left_counts = vec![0u64; n_classes];
    let mut right_counts = vec![0u64; n_classes];
    let mut sum_sq_right = 0u64;
    for &(_, label) in &ordered {
        sum_sq_right += 2 * right_counts[label] + 1;
        right_counts[label] += 1;
    }
    let mut sum_sq_left = 0u64;
    let mut n_left = 0u64;

    let mut best: Option<BestSplit> = None;
    let mut i = 0usize;
    while i < ordered.len() {
        // Move the whole run of equal values left so a threshold never
        // lands inside a tied group.
        let value = ordered[i].0;
        while i < ordered.len() && ordered[i].0 == value {
            let label = ordered[i].1;
            sum_sq_left += 2 * left_counts[label] + 1;
            left_counts[label] += 1;
            sum_sq_right -= 2 * right_counts[label] - 1;
            right_counts[label] -= 1;
            n_left += 1;
            i += 1;
        }
        if i == ordered.len() {
            break;
        }
        let score = SplitScore {
            sum_sq_left,
            n_left,
            sum_sq_right,
            n_right: n - n_left,
        };
        if best.as_ref().is_none_or(|b| score.beats(&b.score)) {
            best = Some(BestSplit {
                feature,
                threshold: (value + ordered[i].0) / 2.0,
                score,
            });
        }
    }
    best
}

fn build(
    view: &TrainView<'_>,
    rows: Vec<usize>,
    selected: &[usize],
    nodes: &mut Vec<Node>,
) -> usize {
    let n_classes = view.n_classes();
    if rows.len() < 2 || is_pure(view, &rows) {
        nodes.push(Node::Leaf {
            class: majority(view, &rows, n_classes),
        });
        return nodes.len() - 1;
    }

    // Smallest feature index wins ties because the scan ascends and
    // replacement requires a strictly better score.
    let mut best: Option<BestSplit> = None;
    for &feature in selected {
        if let Some(candidate) = best_split_on_feature(view, &rows, feature, n_classes) {
            let replace = match &best {
                None => true,
                Some(current) => candidate.score.beats(&current.score),
            };
            if replace {
                best = Some(candidate);
            }
        }
    }

    let Some(split) = best else {
        // Every selected feature is constant here.
        nodes.push(Node::Leaf {
            class: majority(view, &rows, n_classes),
        });
        return nodes.len() - 1;
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| view.value(r, split.feature) <= split.threshold);
    if left_rows.is_empty() || right_rows.is_empty() {
        // Possible only when the midpoint rounds onto a data value.
        nodes.push(Node::Leaf {
            class: majority(view, &rows, n_classes),
        });
        return nodes.len() - 1;
    }

    let at = nodes.len();
    nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = build(view, left_rows, selected, nodes);
    let right = build(view, right_rows, selected, nodes);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut nodes[at]
    {
        *l = left;
        *r = right;
    }
    at
}

/// Fits a tree on `view` using only the features selected by `mask`.
///
/// The mask must be non-empty and match the view's width; callers that may
/// hold an all-zero mask repair it before training.
pub fn fit_tree(view: &TrainView<'_>, mask: &FeatureMask) -> Result<TreeModel, GaError> {
    if mask.len() != view.n_features() {
        return Err(GaError::MaskMismatch);
    }
    if mask.count_ones() == 0 {
        return Err(GaError::EmptyMask);
    }
    if view.n_rows() == 0 {
        return Err(GaError::TooFewRows);
    }

    let selected: Vec<usize> = mask.selected().collect();
    let mut nodes = Vec::new();
    build(view, (0..view.n_rows()).collect(), &selected, &mut nodes);
    Ok(TreeModel {
        nodes,
        mask: mask.clone(),
        n_classes: view.n_classes(),
    })
}
