//! Tabular data: raw ingestion, preprocessing, splitting, and subsampling.
//!
//! The pipeline is `RawTable` (typed cells, possibly missing) ->
//! [`preprocess`] -> `TableData` (dense finite matrix plus encoded labels)
//! -> [`shuffle_split`] -> `SplitData` -> [`subsample`] for surrogate
//! training views. All operations are pure given their seed; types are
//! immutable after construction.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::DataError;
use crate::mask::FeatureMask;

/// One raw cell.
#[derive(Debug, Clone, PartialEq)]
pub enum RawValue {
    Number(f64),
    Text(String),
    Missing,
}

/// One raw column. A column is numeric when every non-missing cell parses
/// as a number; otherwise it is categorical and keeps its text.
#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl RawColumn {
    pub fn len(&self) -> usize {
        match self {
            RawColumn::Numeric(v) => v.len(),
            RawColumn::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A dataset as ingested: typed columns, a designated target column, no
/// imputation or encoding applied yet.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub columns: Vec<RawColumn>,
    pub target_column: usize,
}

impl RawTable {
    /// Builds a table from string records, inferring each column's type.
    ///
    /// A cell equal to one of `missing_tokens` (after trimming) is missing.
    /// A column where every non-missing cell parses as a number is numeric;
    /// any other column is categorical.
    pub fn from_records(
        column_names: Vec<String>,
        rows: &[Vec<String>],
        target_column: usize,
        missing_tokens: &[String],
    ) -> Result<Self, DataError> {
        let n_cols = column_names.len();
        if target_column >= n_cols {
            return Err(DataError::BadTargetColumn {
                index: target_column,
                n_columns: n_cols,
            });
        }
        for row in rows {
            if row.len() != n_cols {
                return Err(DataError::RaggedColumns {
                    expected: n_cols,
                    found: row.len(),
                });
            }
        }
        if rows.is_empty() || n_cols < 2 {
            return Err(DataError::EmptyTable);
        }

        let is_missing = |cell: &str| missing_tokens.iter().any(|t| t == cell);
        let mut columns = Vec::with_capacity(n_cols);
        for c in 0..n_cols {
            let cells: Vec<&str> = rows.iter().map(|r| r[c].trim()).collect();
            let numeric = cells
                .iter()
                .filter(|cell| !is_missing(cell))
                .all(|cell| cell.parse::<f64>().is_ok());
            let any_present = cells.iter().any(|cell| !is_missing(cell));
            if numeric && any_present {
                columns.push(RawColumn::Numeric(
                    cells
                        .iter()
                        .map(|cell| {
                            if is_missing(cell) {
                                None
                            } else {
                                cell.parse().ok()
                            }
                        })
                        .collect(),
                ));
            } else {
                columns.push(RawColumn::Categorical(
                    cells
                        .iter()
                        .map(|cell| {
                            if is_missing(cell) {
                                None
                            } else {
                                Some(cell.to_string())
                            }
                        })
                        .collect(),
                ));
            }
        }

        Ok(Self {
            column_names,
            columns,
            target_column,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, RawColumn::len)
    }
}

/// A preprocessed dataset: dense finite feature matrix (row-major) and
/// class labels encoded `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TableData {
    features: Vec<f64>,
    labels: Vec<usize>,
    n_features: usize,
    n_classes: usize,
}

impl TableData {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self, DataError> {
        let n = labels.len();
        if n == 0 || n_features == 0 || features.len() != n * n_features {
            return Err(DataError::EmptyTable);
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(DataError::EmptyTable);
        }
        if n_classes < 2 {
            return Err(DataError::TooFewClasses { found: n_classes });
        }
        if labels.iter().any(|&l| l >= n_classes) {
            return Err(DataError::TooFewClasses { found: n_classes });
        }
        Ok(Self {
            features,
            labels,
            n_features,
            n_classes,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.n_features + feature]
    }

    pub fn label(&self, row: usize) -> usize {
        self.labels[row]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// New table containing the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            features
                .extend_from_slice(&self.features[r * self.n_features..(r + 1) * self.n_features]);
            labels.push(self.labels[r]);
        }
        Self {
            features,
            labels,
            n_features: self.n_features,
            n_classes: self.n_classes,
        }
    }
}

/// A fixed 60/20/20 partition of a dataset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitData {
    pub train: TableData,
    pub validation: TableData,
    pub test: TableData,
    pub split_seed: u64,
}

/// Row indices, drawn without replacement, identifying a surrogate's
/// training subset within the train partition.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleHandle {
    indices: Vec<usize>,
    pub level: usize,
    pub sample_seed: u64,
}

impl SampleHandle {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// A borrowed training view: either the whole train partition or the rows
/// named by a [`SampleHandle`].
#[derive(Debug, Clone, Copy)]
pub struct TrainView<'a> {
    data: &'a TableData,
    rows: Option<&'a [usize]>,
}

impl<'a> TrainView<'a> {
    pub fn full(data: &'a TableData) -> Self {
        Self { data, rows: None }
    }

    pub fn sampled(data: &'a TableData, handle: &'a SampleHandle) -> Self {
        Self {
            data,
            rows: Some(&handle.indices),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.map_or(self.data.n_instances(), <[usize]>::len)
    }

    pub fn n_features(&self) -> usize {
        self.data.n_features()
    }

    pub fn n_classes(&self) -> usize {
        self.data.n_classes()
    }

    fn resolve(&self, i: usize) -> usize {
        self.rows.map_or(i, |r| r[i])
    }

    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.data.value(self.resolve(i), feature)
    }

    pub fn label(&self, i: usize) -> usize {
        self.data.label(self.resolve(i))
    }

    /// True when this view covers the full train partition.
    pub fn is_full(&self) -> bool {
        self.rows.is_none()
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Encodes, imputes, and label-encodes a raw table.
///
/// Categorical features map to integer codes by sorted lexicographic order
/// of their distinct values; missing cells take the column median (numeric)
/// or mode with lexicographic tie-break (categorical). Labels encode to
/// `0..C` by sorted order of the distinct target values. Missing labels are
/// an error rather than imputed.
pub fn preprocess(raw: &RawTable) -> Result<TableData, DataError> {
    let n = raw.n_rows();
    let n_cols = raw.columns.len();
    if n == 0 || n_cols < 2 {
        return Err(DataError::EmptyTable);
    }
    if raw.target_column >= n_cols {
        return Err(DataError::BadTargetColumn {
            index: raw.target_column,
            n_columns: n_cols,
        });
    }
    for col in &raw.columns {
        if col.len() != n {
            return Err(DataError::RaggedColumns {
                expected: n,
                found: col.len(),
            });
        }
    }

    // Encode labels first: sorted distinct values -> 0..C.
    let labels = encode_labels(raw)?;
    let n_classes = labels.iter().copied().max().unwrap_or(0) + 1;
    if n_classes < 2 {
        return Err(DataError::TooFewClasses { found: n_classes });
    }

    let feature_cols: Vec<usize> = (0..n_cols).filter(|&c| c != raw.target_column).collect();
    let n_features = feature_cols.len();
    if n_features == 0 {
        return Err(DataError::EmptyTable);
    }

    let mut features = vec![0.0f64; n * n_features];
    for (out_c, &c) in feature_cols.iter().enumerate() {
        let encoded = encode_feature_column(&raw.columns[c], &raw.column_names[c])?;
        for (r, v) in encoded.into_iter().enumerate() {
            features[r * n_features + out_c] = v;
        }
    }

    TableData::new(features, labels, n_features, n_classes)
}

fn encode_feature_column(col: &RawColumn, name: &str) -> Result<Vec<f64>, DataError> {
    match col {
        RawColumn::Numeric(cells) => {
            let mut present: Vec<f64> = cells.iter().filter_map(|v| *v).collect();
            if present.is_empty() {
                return Err(DataError::AllMissing {
                    column: name.to_string(),
                });
            }
            present.sort_by(f64::total_cmp);
            let fill = median(&present);
            Ok(cells.iter().map(|v| v.unwrap_or(fill)).collect())
        }
        RawColumn::Categorical(cells) => {
            let mut distinct: Vec<&String> = cells.iter().flatten().collect();
            distinct.sort();
            distinct.dedup();
            if distinct.is_empty() {
                return Err(DataError::AllMissing {
                    column: name.to_string(),
                });
            }
            // Mode; ties broken by lexicographically smallest value, which
            // the ascending scan gives for free with a strict comparison.
            let mut mode = distinct[0];
            let mut mode_count = 0usize;
            for value in &distinct {
                let count = cells.iter().flatten().filter(|c| c == value).count();
                if count > mode_count {
                    mode = value;
                    mode_count = count;
                }
            }
            let code_of = |v: &String| distinct.binary_search(&v).unwrap() as f64;
            Ok(cells
                .iter()
                .map(|cell| code_of(cell.as_ref().unwrap_or(mode)))
                .collect())
        }
    }
}

fn encode_labels(raw: &RawTable) -> Result<Vec<usize>, DataError> {
    match &raw.columns[raw.target_column] {
        RawColumn::Numeric(cells) => {
            let mut distinct: Vec<f64> = Vec::new();
            for (r, v) in cells.iter().enumerate() {
                match v {
                    Some(x) => distinct.push(*x),
                    None => return Err(DataError::MissingLabel { row: r }),
                }
            }
            let mut sorted = distinct.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            Ok(distinct
                .iter()
                .map(|v| sorted.binary_search_by(|p| p.total_cmp(v)).unwrap())
                .collect())
        }
        RawColumn::Categorical(cells) => {
            let mut values: Vec<&String> = Vec::with_capacity(cells.len());
            for (r, v) in cells.iter().enumerate() {
                match v {
                    Some(s) => values.push(s),
                    None => return Err(DataError::MissingLabel { row: r }),
                }
            }
            let mut sorted: Vec<&String> = values.clone();
            sorted.sort();
            sorted.dedup();
            Ok(values
                .iter()
                .map(|v| sorted.binary_search(v).unwrap())
                .collect())
        }
    }
}

/// Shuffles rows with a seeded permutation and cuts a fixed 60/20/20 split.
///
/// Partition sizes are `floor(0.6 N)`, `floor(0.2 N)`, and the remainder;
/// the same seed always yields the same split.
pub fn shuffle_split(data: &TableData, seed: u64) -> Result<SplitData, DataError> {
    let n = data.n_instances();
    let n_train = n * 6 / 10;
    let n_val = n * 2 / 10;
    let n_test = n - n_train - n_val;
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(DataError::TooFewRows { n, minimum: 5 });
    }

    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates, explicit so the permutation is pinned by this crate
    // rather than by a dependency's shuffle implementation.
    for i in (1..n).rev() {
        let j = rand::Rng::gen_range(&mut rng, 0..=i);
        perm.swap(i, j);
    }

    Ok(SplitData {
        train: data.select_rows(&perm[..n_train]),
        validation: data.select_rows(&perm[n_train..n_train + n_val]),
        test: data.select_rows(&perm[n_train + n_val..]),
        split_seed: seed,
    })
}

/// Draws `size` distinct train-row indices uniformly without replacement.
///
/// Indices are returned ascending. Each surrogate level (and perseverance
/// repetition) calls this with a freshly derived seed.
pub fn subsample(
    train: &TableData,
    size: usize,
    level: usize,
    seed: u64,
) -> Result<SampleHandle, DataError> {
    let n = train.n_instances();
    if size == 0 || size > n {
        return Err(DataError::BadSampleSize { size, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = rand::seq::index::sample(&mut rng, n, size).into_vec();
    indices.sort_unstable();
    Ok(SampleHandle {
        indices,
        level,
        sample_seed: seed,
    })
}

/// Accuracy floor used for degenerate masks: always predicting the most
/// frequent class of `labels`.
pub fn class_counts(labels: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// Restricts a mask's selected features to those present in the data.
/// Mask length must equal the table's feature count.
pub fn mask_matches(data: &TableData, mask: &FeatureMask) -> bool {
    mask.len() == data.n_features()
}
