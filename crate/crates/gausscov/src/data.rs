//! Data containers: a column-major covariate matrix and a regression
//! dataset pairing it with a response.

use crate::error::{Error, Result};

/// A dense matrix of covariate columns, stored column-major.
///
/// Columns carry names so that selection output stays readable after
/// feature generation. When `intercept` is true, column 0 is a constant
/// column named `"0"`; selection procedures treat it as an ordinary
/// covariate that is forced into the model first.
#[derive(Debug, Clone)]
pub struct CovariateMatrix {
    n: usize,
    q: usize,
    data: Vec<f64>,
    names: Vec<String>,
    intercept: bool,
}

impl CovariateMatrix {
    /// Builds a matrix from covariate columns.
    ///
    /// With `intercept` set, a constant column named `"0"` is prepended and
    /// every supplied column shifts up by one index.
    pub fn new(columns: Vec<Vec<f64>>, names: Vec<String>, intercept: bool) -> Result<Self> {
        if columns.is_empty() && !intercept {
            return Err(Error::Data("no covariate columns".into()));
        }
        if columns.len() != names.len() {
            return Err(Error::Data(format!(
                "{} columns but {} names",
                columns.len(),
                names.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        if n < 2 {
            return Err(Error::Data(format!("need at least 2 rows, got {n}")));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Data(format!(
                    "column {j} has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "non-finite value at row {i}, column {j} ({})",
                    names[j]
                )));
            }
        }
        let mut all_names = Vec::with_capacity(names.len() + 1);
        if intercept {
            all_names.push("0".to_string());
        }
        all_names.extend(names);
        {
            let mut seen = std::collections::HashSet::new();
            for name in &all_names {
                if !seen.insert(name.as_str()) {
                    return Err(Error::Data(format!("duplicate column name {name:?}")));
                }
            }
        }
        let q = all_names.len();
        let mut data = Vec::with_capacity(n * q);
        if intercept {
            data.extend(std::iter::repeat(1.0).take(n));
        }
        for col in &columns {
            data.extend_from_slice(col);
        }
        Ok(CovariateMatrix {
            n,
            q,
            data,
            names: all_names,
            intercept,
        })
    }

    /// Number of rows (observations).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of columns, the intercept column included when present.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Whether column 0 is a forced constant column.
    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Index of the column with the given name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A covariate matrix together with the response it will be regressed on.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: CovariateMatrix,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: CovariateMatrix, y: Vec<f64>) -> Result<Self> {
        if y.len() != x.n() {
            return Err(Error::Data(format!(
                "response has {} rows, covariates have {}",
                y.len(),
                x.n()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite response at row {i}")));
        }
        Ok(Dataset { x, y })
    }

    /// Convenience constructor from raw columns.
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        names: Vec<String>,
        y: Vec<f64>,
        intercept: bool,
    ) -> Result<Self> {
        Dataset::new(CovariateMatrix::new(columns, names, intercept)?, y)
    }

    pub fn x(&self) -> &CovariateMatrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn q(&self) -> usize {
        self.x.q()
    }
}
