//! Seeded synthetic benchmark generators.
//!
//! Three fixtures of increasing size, each deterministic in its seed:
//!
//! * [`oracle8`] — small enough to brute-force every feature subset, so a
//!   search result can be checked against the true optimum.
//! * [`planted20`] — three informative features planted among noise; a
//!   correct search must recover all three.
//! * [`derm_like`] — a clinical-records-shaped table (366 rows, 34 mostly
//!   ordinal features, 6 imbalanced classes) where irrelevant features
//!   actively hurt an unpruned tree, giving feature selection room to win.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saga_core::seed::{self, tag};
use saga_core::TableData;

use crate::CliError;

/// Informative feature indices of [`oracle8`].
pub const ORACLE8_INFORMATIVE: [usize; 3] = [1, 3, 6];
/// Informative feature indices of [`planted20`].
pub const PLANTED20_INFORMATIVE: [usize; 3] = [2, 11, 17];

/// Per-class row counts of [`derm_like`]; they sum to 366.
pub const DERM_CLASS_COUNTS: [usize; 6] = [112, 61, 72, 49, 52, 20];

/// Uniform features in [0, 1); the label is the majority vote of the three
/// informative features thresholded at 0.5, then flipped with probability
/// `flip_prob`.
fn noisy_majority(
    n_rows: usize,
    n_features: usize,
    informative: &[usize; 3],
    flip_prob: f64,
    rng: &mut ChaCha8Rng,
) -> TableData {
    let mut features = Vec::with_capacity(n_rows * n_features);
    let mut labels = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let start = features.len();
        for _ in 0..n_features {
            features.push(rng.gen_range(0.0..1.0));
        }
        let votes = informative
            .iter()
            .filter(|&&j| features[start + j] > 0.5)
            .count();
        let mut label = usize::from(votes >= 2);
        if rng.gen_bool(flip_prob) {
            label = 1 - label;
        }
        labels.push(label);
    }
    TableData::new(features, labels, n_features, 2).expect("generator produces a valid table")
}

/// 60 rows, 8 binary features, labels driven by features 1, 3, and 6 with
/// 8% label noise. 255 candidate masks — exhaustively checkable.
///
/// Informative features fire rarely (p = 0.3) and the label is their OR, so
/// each one carries real marginal signal; noise features are fair coins.
/// Binary columns keep the split space tiny, which stops an unpruned tree
/// from memorizing the small validation partition through lucky thresholds —
/// the exhaustive optimum stays a structural property of the rule rather
/// than an artifact of one overfit mask.
pub fn oracle8(seed_value: u64) -> TableData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed_value, tag::SYNTH, 0));
    let (n_rows, n_features) = (60, 8);
    let mut features = Vec::with_capacity(n_rows * n_features);
    let mut labels = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let start = features.len();
        for j in 0..n_features {
            let p = if ORACLE8_INFORMATIVE.contains(&j) {
                0.3
            } else {
                0.5
            };
            features.push(f64::from(rng.gen_bool(p)));
        }
        let fired = ORACLE8_INFORMATIVE
            .iter()
            .any(|&j| features[start + j] > 0.5);
        let mut label = usize::from(fired);
        if rng.gen_bool(0.08) {
            label = 1 - label;
        }
        labels.push(label);
    }
    TableData::new(features, labels, n_features, 2).expect("generator produces a valid table")
}

/// 2000 rows, 20 features, binary labels driven by features 2, 11, and 17
/// with 5% label noise.
pub fn planted20(seed_value: u64) -> TableData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed_value, tag::SYNTH, 1));
    noisy_majority(2000, 20, &PLANTED20_INFORMATIVE, 0.05, &mut rng)
}

/// 366 rows, 34 features, 6 classes with fixed imbalanced counts.
///
/// Features 0–11 are ordinal (0–3) with a per-class prototype level plus
/// light noise; features 12–17 share prototypes between class pairs
/// (weakly informative); features 18–32 are pure ordinal noise; feature 33
/// is a numeric age-like value with heavily overlapping class ranges.
pub fn derm_like(seed_value: u64) -> TableData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed_value, tag::SYNTH, 2));
    let n_features = 34;

    // Class sequence: exact counts, order shuffled.
    let mut labels: Vec<usize> = DERM_CLASS_COUNTS
        .iter()
        .enumerate()
        .flat_map(|(class, &count)| std::iter::repeat_n(class, count))
        .collect();
    for i in (1..labels.len()).rev() {
        let j = rng.gen_range(0..=i);
        labels.swap(i, j);
    }

    // Ordinal prototypes: strong per-class for features 0-11, shared by
    // class pair for features 12-17.
    let strong: Vec<[i32; 6]> = (0..12)
        .map(|_| {
            let mut levels = [0i32; 6];
            for level in &mut levels {
                *level = rng.gen_range(0..=3);
            }
            levels
        })
        .collect();
    let weak: Vec<[i32; 3]> = (0..6)
        .map(|_| {
            let mut levels = [0i32; 3];
            for level in &mut levels {
                *level = rng.gen_range(0..=3);
            }
            levels
        })
        .collect();

    let ordinal_noise = |proto: i32, spread: f64, rng: &mut ChaCha8Rng| -> f64 {
        let r: f64 = rng.gen_range(0.0..1.0);
        let shift = if r < spread {
            -1
        } else if r >= 1.0 - spread {
            1
        } else {
            0
        };
        (proto + shift).clamp(0, 3) as f64
    };

    let mut features = Vec::with_capacity(labels.len() * n_features);
    for &class in &labels {
        for levels in &strong {
            features.push(ordinal_noise(levels[class], 0.3, &mut rng));
        }
        for levels in &weak {
            features.push(ordinal_noise(levels[class / 2], 0.4, &mut rng));
        }
        // Continuous noise columns give an unpruned tree plenty of
        // spurious split points, so keeping them hurts generalization.
        for _ in 18..33 {
            features.push(rng.gen_range(0.0..1.0));
        }
        let age = 30.0 + 4.0 * class as f64 + rng.gen_range(0.0..35.0);
        features.push(age);
    }
    TableData::new(features, labels, n_features, 6).expect("generator produces a valid table")
}

/// Generator registry used by the `synth` subcommand.
pub fn generate(name: &str, seed_value: u64) -> Result<TableData, CliError> {
    match name {
        "oracle8" => Ok(oracle8(seed_value)),
        "planted20" => Ok(planted20(seed_value)),
        "dermlike" => Ok(derm_like(seed_value)),
        other => Err(CliError::Config(format!(
            "unknown synthetic dataset `{other}` (expected oracle8, planted20, or dermlike)"
        ))),
    }
}
