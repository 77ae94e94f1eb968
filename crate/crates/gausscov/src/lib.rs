//! Covariate selection through exact Gaussian-covariate P-values.
//!
//! The central quantity is the probability that a standard Gaussian noise
//! covariate, added to the current regression model, would reduce the
//! residual sum of squares at least as much as a candidate covariate does.
//! That probability has an exact beta-distribution form, needs no model
//! for the response, and adjusts for the size of the candidate pool. On
//! top of it this crate builds stepwise, all-subsets, and repeated
//! selection, dependency graphs over columns, equivalence regions of
//! indistinguishable coefficient vectors, robust and logistic variants,
//! and Monte Carlo harnesses for calibrating false-positive behavior.

pub mod data;
pub mod engine;
pub mod equivalence;
pub mod error;
pub mod extensions;
pub mod featuregen;
pub mod graphs;
pub mod montecarlo;
pub mod pvalues;
pub mod selection;
pub mod specfun;

pub use data::{CovariateMatrix, Dataset};
pub use error::{Error, Result};
pub use specfun::{BetaParams, Prob};
