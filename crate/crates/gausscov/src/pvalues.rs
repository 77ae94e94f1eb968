//! Exact P-values for comparing regression models against Gaussian noise.
//!
//! The central quantity: if a model with `k0` covariates is extended by
//! `k − k0` columns of pure Gaussian noise, the ratio of the residual sums
//! of squares is exactly Beta((n−k)/2, (k−k0)/2) distributed. The observed
//! ratio's lower tail is therefore an exact P-value, with no assumptions
//! on the response. Stepwise selection uses the order-statistic extension:
//! the best of `m` noise candidates has a Beta(1, m) tail, the ν-th best a
//! Beta(ν, m−ν+1) tail.

use crate::data::CovariateMatrix;
use crate::engine::ActiveModel;
use crate::error::{Error, Result};
use crate::specfun::{beta_cdf2, beta_quantile, f_sf, BetaParams, Prob};

fn check_rss_pair(rss0: f64, rss: f64) -> Result<(f64, f64)> {
    if !(rss0.is_finite() && rss.is_finite()) || rss0 <= 0.0 || rss < 0.0 {
        return Err(Error::Domain(format!(
            "residual sums must satisfy 0 <= rss <= rss0 with rss0 > 0, got ({rss0}, {rss})"
        )));
    }
    // Tolerate roundoff slightly above the baseline.
    if rss > rss0 {
        if rss > rss0 * (1.0 + 1e-9) {
            return Err(Error::Domain(format!(
                "rss {rss} exceeds baseline {rss0}"
            )));
        }
        return Ok((rss0, rss0));
    }
    Ok((rss0, rss))
}

/// P-value for extending a `k0`-covariate model to `k` covariates, via the
/// lower Beta tail of the rss ratio.
pub fn pg_nested(rss0: f64, rss: f64, n: usize, k: usize, k0: usize) -> Result<Prob> {
    let (rss0, rss) = check_rss_pair(rss0, rss)?;
    if k0 >= k || k >= n {
        return Err(Error::Domain(format!(
            "need k0 < k < n, got k0={k0}, k={k}, n={n}"
        )));
    }
    let p = BetaParams::new((n - k) as f64 / 2.0, (k - k0) as f64 / 2.0)?;
    let (cdf, _) = beta_cdf2(rss / rss0, (rss0 - rss) / rss0, p)?;
    Ok(cdf)
}

/// The same P-value through the classical route: the upper tail of the
/// F statistic with (k−k0, n−k) degrees of freedom. Kept as an
/// independently computed alternative to [`pg_nested`]; the two agree to
/// near machine precision.
pub fn pg_nested_f(rss0: f64, rss: f64, n: usize, k: usize, k0: usize) -> Result<Prob> {
    let (rss0, rss) = check_rss_pair(rss0, rss)?;
    if k0 >= k || k >= n {
        return Err(Error::Domain(format!(
            "need k0 < k < n, got k0={k0}, k={k}, n={n}"
        )));
    }
    if rss == 0.0 {
        return Prob::new(0.0);
    }
    let d1 = (k - k0) as f64;
    let d2 = (n - k) as f64;
    let f = ((rss0 - rss) / d1) / (rss / d2);
    f_sf(f, d1, d2)
}

fn step_shape(n: usize, k: usize, q_pool: usize, nu: usize) -> Result<(BetaParams, BetaParams)> {
    if k + 1 >= n {
        return Err(Error::Domain(format!(
            "model size {k} leaves no residual degrees of freedom at n={n}"
        )));
    }
    if q_pool <= k {
        return Err(Error::Domain(format!(
            "candidate pool {q_pool} exhausted by model size {k}"
        )));
    }
    let m = q_pool - k;
    if nu == 0 || nu > m {
        return Err(Error::Domain(format!(
            "order statistic rank {nu} outside 1..={m}"
        )));
    }
    // The candidate enlarges the model from k to k + 1 covariates, so the
    // noise law of its rss ratio is Beta((n − k − 1)/2, 1/2).
    let inner = BetaParams::new((n - k - 1) as f64 / 2.0, 0.5)?;
    let outer = BetaParams::new(nu as f64, (m - nu + 1) as f64)?;
    Ok((inner, outer))
}

/// Stepwise-selection P-value for a candidate that brought the rss from
/// `rss0` down to `rss_i`.
///
/// `k` counts the covariates already in the model (the candidate itself is
/// not included), `q_pool` the size of the pool the candidate competed in,
/// and `nu` the order-statistic rank: `nu = 1` asks whether the best of
/// the remaining `q_pool − k` candidates beats noise, larger ranks ask the
/// same of the ν-th best, which tempers the early steps when many strong
/// covariates are present.
///
/// The noise yardstick is exact: one Gaussian column added to the model
/// gives an rss ratio distributed Beta((n−k−1)/2, 1/2), and the pool
/// contributes the order-statistic layer Beta(ν, q_pool−k−ν+1) on the
/// resulting uniform.
pub fn step_pvalue(
    rss0: f64,
    rss_i: f64,
    n: usize,
    k: usize,
    q_pool: usize,
    nu: usize,
) -> Result<Prob> {
    let (rss0, rss_i) = check_rss_pair(rss0, rss_i)?;
    let (inner_p, outer_p) = step_shape(n, k, q_pool, nu)?;
    let (inner, inner_sf) = beta_cdf2(rss_i / rss0, (rss0 - rss_i) / rss0, inner_p)?;
    if nu == 1 {
        // 1 − (1 − inner)^m without cancellation on either side: the log
        // goes through whichever tail is small.
        let m = (q_pool - k) as f64;
        let sf = inner_sf.value();
        if sf == 0.0 {
            return Prob::new(1.0);
        }
        let ln_sf = if inner.value() < 0.5 {
            (-inner.value()).ln_1p()
        } else {
            sf.ln()
        };
        return Ok(Prob::clamped(-(m * ln_sf).exp_m1()));
    }
    beta_cdf2(inner.value(), inner_sf.value(), outer_p).map(|(cdf, _)| cdf)
}

/// Converts a stepwise P-value to the scale of a single classical F-test.
///
/// Inverts the order-statistic layer (quantile of Beta(1, m)), maps the
/// recovered tail back to an rss ratio (quantile of Beta((n−k)/2, 1/2)),
/// forms the matching F statistic, and returns its upper tail. The result
/// answers: a candidate found significant at `p` among `q_pool − k` would
/// have needed this P-value if it had been tested alone.
pub fn pf_from_pg(p: Prob, n: usize, k: usize, q_pool: usize) -> Result<Prob> {
    let (inner_p, _) = step_shape(n, k, q_pool, 1)?;
    let m = (q_pool - k) as f64;
    let tail = beta_quantile(p.value(), BetaParams::new(1.0, m)?)?;
    if tail == 0.0 {
        return Prob::new(0.0);
    }
    if tail == 1.0 {
        return Prob::new(1.0);
    }
    let ratio = beta_quantile(tail, inner_p)?;
    let d2 = (n - k - 1) as f64;
    let f = d2 * (1.0 - ratio) / ratio;
    f_sf(f, 1.0, d2)
}

/// Per-member P-values of a selected subset, from refits without each
/// member.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MemberPvalue {
    pub index: usize,
    pub name: String,
    /// rss of the subset refit without this member.
    pub rss_without: f64,
    /// P-value adjusted for the selection pool: the member is treated as
    /// the last candidate accepted out of the whole pool.
    pub adjusted: Prob,
    /// P-value of the member as if it had been tested alone.
    pub standard: Prob,
}

/// Leave-one-out P-values for every member of the current model.
///
/// Each member is scored as if it had been the last covariate added to the
/// other `k − 1`: `adjusted` uses the full candidate pool of the selection
/// round, `standard` a pool of one. A constant column acting as the
/// intercept is never in competition with the pool, so its adjusted value
/// equals its standard one.
pub fn leave_one_out_pvalues(
    model: &ActiveModel,
    x: &CovariateMatrix,
    q_pool: usize,
    nu: usize,
) -> Result<Vec<MemberPvalue>> {
    let k = model.k();
    if k == 0 {
        return Ok(Vec::new());
    }
    let n = x.n();
    let rss = model.rss();
    let dropped = model.drop_one_rss()?;
    model
        .selected()
        .iter()
        .zip(dropped)
        .map(|(&idx, rss_without)| {
            let standard = step_pvalue(rss_without, rss, n, k - 1, k, 1)?;
            let is_intercept = x.has_intercept() && idx == 0;
            let adjusted = if is_intercept {
                standard
            } else {
                step_pvalue(rss_without, rss, n, k - 1, q_pool, nu)?
            };
            Ok(MemberPvalue {
                index: idx,
                name: x.name(idx).to_string(),
                rss_without,
                adjusted,
                standard,
            })
        })
        .collect()
}
