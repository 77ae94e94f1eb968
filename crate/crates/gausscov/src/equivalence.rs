//! Equivalence regions: the set of coefficient vectors whose fit cannot be
//! distinguished from the least-squares fit at a chosen level. The region
//! coincides numerically with the classical confidence ellipsoid, but its
//! reading is model-free: membership means the fitted values are as good an
//! approximation of the response as least squares itself.

use crate::data::Dataset;
use crate::engine::ActiveModel;
use crate::error::{Error, Result};
use crate::specfun::{f_quantile, Prob};

/// Full-model least-squares summary together with the equivalence radius.
#[derive(Debug, Clone)]
pub struct EquivalenceRegion {
    /// Number of observations.
    pub n: usize,
    /// Number of columns in the design, intercept included when present.
    pub q: usize,
    /// Level of the region.
    pub alpha: f64,
    /// Residual sum of squares of the full least-squares fit.
    pub rss_full: f64,
    /// Bound on the squared fitted-value displacement `‖X(β − β_ls)‖²`.
    pub radius: f64,
    /// Least-squares coefficients, in column order.
    pub beta_ls: Vec<f64>,
}

/// Membership verdict for one candidate coefficient vector.
#[derive(Debug, Clone, Copy)]
pub struct Containment {
    pub inside: bool,
    /// Squared fitted-value displacement `‖X(β − β_ls)‖²`.
    pub displacement: f64,
    /// The radius the displacement was compared against.
    pub radius: f64,
}

/// Radius of the level `1 − alpha` equivalence region around the
/// least-squares fit: `rss_full · q · F⁻¹(1 − alpha; q, n − q) / (n − q)`.
///
/// A coefficient vector β belongs to the region when
/// `‖X(β − β_ls)‖²` is at most this value, which is the classical
/// F-statistic acceptance condition rearranged.
pub fn equiv_radius(rss_full: f64, n: usize, q: usize, alpha: Prob) -> Result<f64> {
    if q == 0 || q >= n {
        return Err(Error::Domain(format!(
            "equivalence region needs 0 < q < n, got q = {q}, n = {n}"
        )));
    }
    if !rss_full.is_finite() || rss_full <= 0.0 {
        return Err(Error::Domain(format!(
            "full-model rss must be positive, got {rss_full}"
        )));
    }
    let d1 = q as f64;
    let d2 = (n - q) as f64;
    let f = f_quantile(1.0 - alpha.value(), d1, d2)?;
    Ok(rss_full * d1 * f / d2)
}

/// Fits the full model and returns its equivalence region.
///
/// Every column of the design participates, so the design must have full
/// column rank; a dependent column surfaces as [`Error::Collinear`]. An
/// exact fit (zero residual) has no region and is reported as a domain
/// error.
pub fn equivalence_region(d: &Dataset, alpha: Prob) -> Result<EquivalenceRegion> {
    let (model, _) = full_fit(d)?;
    let rss_full = model.rss();
    let radius = equiv_radius(rss_full, d.n(), d.q(), alpha)?;
    Ok(EquivalenceRegion {
        n: d.n(),
        q: d.q(),
        alpha: alpha.value(),
        rss_full,
        radius,
        beta_ls: model.coefficients()?,
    })
}

/// Tests whether the coefficient vector `beta` is equivalent to least
/// squares at level `1 − alpha`, returning the verdict together with the
/// displacement so callers can report how far inside or outside it lies.
pub fn equiv_contains(d: &Dataset, beta: &[f64], alpha: Prob) -> Result<Containment> {
    if beta.len() != d.q() {
        return Err(Error::Data(format!(
            "coefficient vector has length {}, design has {} columns",
            beta.len(),
            d.q()
        )));
    }
    let (model, fitted_ls) = full_fit(d)?;
    let radius = equiv_radius(model.rss(), d.n(), d.q(), alpha)?;
    let mut displacement = 0.0;
    for t in 0..d.n() {
        let mut v = -fitted_ls[t];
        for (j, &bj) in beta.iter().enumerate() {
            v += bj * d.x().column(j)[t];
        }
        displacement += v * v;
    }
    Ok(Containment {
        inside: displacement <= radius,
        displacement,
        radius,
    })
}

/// Least-squares fit on all columns, plus its fitted values.
fn full_fit(d: &Dataset) -> Result<(ActiveModel, Vec<f64>)> {
    let mut model = ActiveModel::new(d);
    for j in 0..d.q() {
        model.add_covariate(d.x(), j)?;
    }
    let fitted: Vec<f64> = d
        .y()
        .iter()
        .zip(model.residual())
        .map(|(yi, ri)| yi - ri)
        .collect();
    Ok((model, fitted))
}
