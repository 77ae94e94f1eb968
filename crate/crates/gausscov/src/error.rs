use thiserror::Error;

/// Errors produced by the selection toolkit.
///
/// Variants are grouped so a caller can map them onto coarse exit
/// categories: `Data` for malformed input, everything else for numerical
/// or usage failures detected during computation.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data failed validation (dimensions, finiteness, names).
    #[error("data error: {0}")]
    Data(String),

    /// A covariate column is numerically collinear with the current model.
    #[error("column {index} ({name}) is collinear with the selected model")]
    Collinear { index: usize, name: String },

    /// An iterative routine failed to reach its tolerance.
    #[error("no convergence in {routine}: {detail}")]
    NonConvergence { routine: &'static str, detail: String },

    /// Logistic likelihood is unbounded for this candidate set.
    #[error("complete separation while fitting {0}")]
    Separation(String),

    /// An enumeration was refused because it would exceed a configured cap.
    #[error("refusing {what}: size {size} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
