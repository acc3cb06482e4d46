//! Error types shared across the crate.

use alloc::string::String;
use core::fmt;

/// Errors raised while building or transforming tabular data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataError {
    /// Columns of a raw table differ in length.
    RaggedColumns { expected: usize, found: usize },
    /// The table has no rows or no feature columns.
    EmptyTable,
    /// The configured target column index is out of range.
    BadTargetColumn { index: usize, n_columns: usize },
    /// A column contains only missing values, so it cannot be imputed.
    AllMissing { column: String },
    /// A label cell is missing; labels are never imputed.
    MissingLabel { row: usize },
    /// Fewer than two distinct class labels after encoding.
    TooFewClasses { found: usize },
    /// Too few rows to give every split partition at least one row.
    TooFewRows { n: usize, minimum: usize },
    /// Requested subsample size is outside `1..=n_instances`.
    BadSampleSize { size: usize, n: usize },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::RaggedColumns { expected, found } => {
                write!(
                    f,
                    "ragged columns: expected length {expected}, found {found}"
                )
            }
            DataError::EmptyTable => write!(f, "table has no usable rows or feature columns"),
            DataError::BadTargetColumn { index, n_columns } => {
                write!(
                    f,
                    "target column index {index} out of range for {n_columns} columns"
                )
            }
            DataError::AllMissing { column } => {
                write!(f, "column '{column}' contains only missing values")
            }
            DataError::MissingLabel { row } => write!(f, "missing label in row {row}"),
            DataError::TooFewClasses { found } => {
                write!(f, "need at least 2 distinct class labels, found {found}")
            }
            DataError::TooFewRows { n, minimum } => {
                write!(f, "need at least {minimum} rows to split, got {n}")
            }
            DataError::BadSampleSize { size, n } => {
                write!(f, "sample size {size} outside 1..={n}")
            }
        }
    }
}

/// Errors raised by the search algorithms and their configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GaError {
    /// Two masks of different lengths were combined.
    MaskLengthMismatch { left: usize, right: usize },
    /// A fitness call received an unusable mask or row set.
    EmptyMask,
    /// A model was asked to predict under a different mask than it was
    /// trained with.
    MaskMismatch,
    /// Fewer than two rows were supplied to the tree inducer.
    TooFewRows,
    /// A configuration value is outside its valid range.
    BadConfig(String),
    /// The sampling schedule degenerates for this dataset size.
    DegenerateSchedule(String),
    /// Run sets passed to a comparison come from different datasets/splits.
    DatasetMismatch,
    /// Underlying data error.
    Data(DataError),
}

impl fmt::Display for GaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaError::MaskLengthMismatch { left, right } => {
                write!(f, "mask length mismatch: {left} vs {right}")
            }
            GaError::EmptyMask => write!(f, "mask selects no features"),
            GaError::MaskMismatch => write!(f, "mask differs from the mask used at fit time"),
            GaError::TooFewRows => write!(f, "need at least 2 training rows"),
            GaError::BadConfig(msg) => write!(f, "invalid configuration: {msg}"),
            GaError::DegenerateSchedule(msg) => write!(f, "degenerate sampling schedule: {msg}"),
            GaError::DatasetMismatch => {
                write!(f, "run reports come from different datasets or splits")
            }
            GaError::Data(e) => write!(f, "data error: {e}"),
        }
    }
}

impl From<DataError> for GaError {
    fn from(e: DataError) -> Self {
        GaError::Data(e)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DataError {}

#[cfg(feature = "std")]
impl std::error::Error for GaError {}
