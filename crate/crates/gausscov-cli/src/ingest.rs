//! CSV ingestion: numeric tables with a named or indexed response column,
//! configurable delimiter, and an explicit missing-value policy.

use std::path::Path;

use gausscov::{CovariateMatrix, Dataset};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum NaPolicy {
    /// Reject the file, reporting the first missing cell.
    Error,
    /// Drop every row containing a missing value.
    Drop,
}

pub struct IngestOptions {
    pub delimiter: char,
    pub header: bool,
    pub na: NaPolicy,
    pub intercept: bool,
}

fn data_err(message: String) -> CliError {
    CliError { code: 3, message }
}

fn is_missing(field: &str) -> bool {
    field.is_empty()
        || field.eq_ignore_ascii_case("na")
        || field.eq_ignore_ascii_case("n/a")
        || field.eq_ignore_ascii_case("nan")
}

/// Raw parse: column names (from the header or synthesized as `v1..`)
/// and column-major values.
fn read_columns(
    path: &Path,
    opt: &IngestOptions,
) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opt.delimiter as u8)
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(format!("cannot read {}: {e}", path.display())))?;

    let mut names: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record
            .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        let line = record
            .position()
            .map_or(0, |p| p.line());
        if names.is_none() {
            if opt.header {
                names = Some(record.iter().map(|f| f.trim_matches('"').to_string()).collect());
                columns = vec![Vec::new(); record.len()];
                continue;
            }
            names = Some((1..=record.len()).map(|j| format!("v{j}")).collect());
            columns = vec![Vec::new(); record.len()];
        }
        if record.len() != columns.len() {
            return Err(data_err(format!(
                "{} line {line}: {} fields, expected {}",
                path.display(),
                record.len(),
                columns.len()
            )));
        }
        let mut row = Vec::with_capacity(columns.len());
        let mut drop_row = false;
        for (j, field) in record.iter().enumerate() {
            if is_missing(field) {
                match opt.na {
                    NaPolicy::Drop => {
                        drop_row = true;
                        break;
                    }
                    NaPolicy::Error => {
                        return Err(data_err(format!(
                            "{} line {line}, column {} ({}): missing value",
                            path.display(),
                            j + 1,
                            names.as_ref().unwrap()[j]
                        )));
                    }
                }
            }
            let v: f64 = field.parse().map_err(|_| {
                data_err(format!(
                    "{} line {line}, column {} ({}): cannot parse {field:?} as a number",
                    path.display(),
                    j + 1,
                    names.as_ref().unwrap()[j]
                ))
            })?;
            row.push(v);
        }
        if drop_row {
            continue;
        }
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    let names = names.ok_or_else(|| data_err(format!("{}: empty file", path.display())))?;
    if columns.first().map_or(true, |c| c.is_empty()) {
        return Err(data_err(format!("{}: no data rows", path.display())));
    }
    Ok((names, columns))
}

fn target_index(names: &[String], target: &str) -> Result<usize, CliError> {
    if let Some(t) = names.iter().position(|n| n.eq_ignore_ascii_case(target)) {
        return Ok(t);
    }
    if let Ok(idx) = target.parse::<usize>() {
        if idx < names.len() {
            return Ok(idx);
        }
    }
    Err(data_err(format!(
        "no column named {target:?}; available: {}",
        names.join(", ")
    )))
}

/// Reads a dataset, splitting out the response column named (or indexed)
/// by `target`.
pub fn ingest_csv(
    path: &Path,
    target: &str,
    opt: &IngestOptions,
) -> Result<Dataset, CliError> {
    let (names, columns) = read_columns(path, opt)?;
    let t = target_index(&names, target)?;
    let mut cov_names = Vec::new();
    let mut cov_cols = Vec::new();
    let mut y = Vec::new();
    for (j, (name, col)) in names.into_iter().zip(columns).enumerate() {
        if j == t {
            y = col;
        } else {
            cov_names.push(name);
            cov_cols.push(col);
        }
    }
    Dataset::from_columns(cov_cols, cov_names, y, opt.intercept)
        .map_err(CliError::from)
}

/// Reads every column as a covariate, with no response split.
pub fn ingest_matrix(path: &Path, opt: &IngestOptions) -> Result<CovariateMatrix, CliError> {
    let (names, columns) = read_columns(path, opt)?;
    CovariateMatrix::new(columns, names, opt.intercept).map_err(CliError::from)
}
