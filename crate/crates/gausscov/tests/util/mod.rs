//! Shared helpers for the integration suites: locating the optional
//! benchmark datasets and reading plain numeric CSV files.

use std::path::PathBuf;

use gausscov::Dataset;

/// Directory holding the optional benchmark datasets: `GAUSSCOV_DATA`
/// when set, otherwise `data/` at the workspace root.
pub fn data_dir() -> Option<PathBuf> {
    if let Ok(dir) = std::env::var("GAUSSCOV_DATA") {
        let p = PathBuf::from(dir);
        if p.is_dir() {
            return Some(p);
        }
    }
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    p.is_dir().then_some(p)
}

/// A numeric table read from disk: column names and column values.
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

fn parse_row(line: &str, delimiter: char) -> Option<Vec<f64>> {
    line.split(delimiter)
        .map(|f| f.trim().trim_matches('"').parse::<f64>().ok())
        .collect()
}

/// Reads a delimited numeric file from the data directory, `None` when it
/// is not there. A first row that does not parse as numbers is taken as
/// the header; otherwise columns are named `v0`, `v1`, and so on.
pub fn read_table(file: &str, delimiter: char) -> Option<Table> {
    let path = data_dir()?.join(file);
    let text = std::fs::read_to_string(&path).ok()?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let first = lines.first()?;
    let (names, body): (Vec<String>, &[&str]) = match parse_row(first, delimiter) {
        Some(row) => (
            (0..row.len()).map(|j| format!("v{j}")).collect(),
            &lines[..],
        ),
        None => (
            first
                .split(delimiter)
                .map(|h| h.trim().trim_matches('"').to_string())
                .collect(),
            &lines[1..],
        ),
    };
    let mut columns = vec![Vec::new(); names.len()];
    for line in body {
        let row = parse_row(line, delimiter)
            .unwrap_or_else(|| panic!("unparseable row in {file}: {line:?}"));
        assert_eq!(row.len(), columns.len(), "ragged row in {file}");
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    Some(Table { names, columns })
}

/// Loads a benchmark file as a dataset with an intercept, taking the
/// column named `target` (case-insensitive) as the response. `None` when
/// the file is not present.
pub fn dataset(file: &str, delimiter: char, target: &str) -> Option<Dataset> {
    let table = read_table(file, delimiter)?;
    let t = table
        .names
        .iter()
        .position(|h| h.eq_ignore_ascii_case(target))
        .unwrap_or_else(|| panic!("no column named {target:?} in {file}"));
    let mut names = Vec::new();
    let mut cols = Vec::new();
    let mut y = Vec::new();
    for (j, (name, col)) in table.names.iter().zip(table.columns).enumerate() {
        if j == t {
            y = col;
        } else {
            names.push(name.clone());
            cols.push(col);
        }
    }
    Some(Dataset::from_columns(cols, names, y, true).expect("valid dataset"))
}
