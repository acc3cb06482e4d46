//! CSV loading and writing for labelled tables.
//!
//! Input files carry a header row; every later row is one record. The
//! target column defaults to the last column and may be overridden. Cells
//! matching a missing token (`?` or empty by default) are treated as absent
//! and imputed during preprocessing.

use std::path::Path;

use saga_core::{preprocess, RawTable, TableData};

use crate::CliError;

/// Tokens recognized as missing values unless the caller overrides them.
pub fn default_missing_tokens() -> Vec<String> {
    vec![String::from("?"), String::new()]
}

/// Reads a headered CSV file into an untyped table.
pub fn load_raw_csv(
    path: &Path,
    target_column: Option<usize>,
    missing_tokens: &[String],
) -> Result<RawTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Dataset(format!("cannot open {}: {e}", path.display())))?;

    let column_names: Vec<String> = reader
        .headers()
        .map_err(bad_csv)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(bad_csv)?;
        rows.push(record.iter().map(str::to_string).collect::<Vec<String>>());
    }
    let target = target_column.unwrap_or(column_names.len().saturating_sub(1));
    RawTable::from_records(column_names, &rows, target, missing_tokens).map_err(CliError::from)
}

/// Loads and preprocesses a dataset in one step.
pub fn load_dataset(
    path: &Path,
    target_column: Option<usize>,
    missing_tokens: &[String],
) -> Result<TableData, CliError> {
    let raw = load_raw_csv(path, target_column, missing_tokens)?;
    preprocess(&raw).map_err(CliError::from)
}

/// Writes a numeric table as CSV with `f0..f{K-1},class` headers, the
/// format the synthetic generators and the loader round-trip.
pub fn write_table_csv(table: &TableData, path: &Path) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    let mut header: Vec<String> = (0..table.n_features()).map(|j| format!("f{j}")).collect();
    header.push(String::from("class"));
    writer.write_record(&header).map_err(write_failed)?;
    for row in 0..table.n_instances() {
        let mut record: Vec<String> = (0..table.n_features())
            .map(|j| table.value(row, j).to_string())
            .collect();
        record.push(table.label(row).to_string());
        writer.write_record(&record).map_err(write_failed)?;
    }
    writer.flush()?;
    Ok(())
}

fn bad_csv(err: csv::Error) -> CliError {
    CliError::Dataset(format!("malformed csv: {err}"))
}

fn write_failed(err: csv::Error) -> CliError {
    CliError::Config(format!("csv write failed: {err}"))
}
