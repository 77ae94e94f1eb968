//! Deterministic design construction: interaction monomials up to a total
//! degree, trigonometric bases for periodicity hunting, and lag matrices
//! for autoregression. All generators are pure functions of their inputs,
//! so regenerating a design is bitwise reproducible.

use crate::data::{CovariateMatrix, Dataset};
use crate::error::{Error, Result};

/// Number of monomials of total degree at most `max_order` in `q`
/// variables, the constant included: `C(q + d, d)`.
pub fn interaction_count(q: usize, max_order: usize) -> Result<u128> {
    let mut c: u128 = 1;
    for i in 1..=max_order {
        c = c
            .checked_mul((q + i) as u128)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "interaction count for q = {q}, degree {max_order} overflows"
                ))
            })?
            / i as u128;
    }
    Ok(c)
}

/// Expands a dataset into all interaction monomials of total degree at
/// most `max_order` over its non-constant columns.
///
/// The output keeps the original response. Its design holds the constant
/// column plus every monomial, `C(q + d, d)` columns in all, in
/// degree-major order (all of degree 1, then degree 2, and so on, each
/// degree in lexicographic order of the index tuple). Columns are named by
/// the 1-based indices of the base covariates with powers, for example
/// `6^4·11·12·13` for x₆⁴·x₁₁·x₁₂·x₁₃.
///
/// Refuses with [`Error::CapExceeded`] when the count exceeds `cap`.
pub fn interactions(d: &Dataset, max_order: usize, cap: usize) -> Result<Dataset> {
    if max_order == 0 {
        return Err(Error::Domain("interaction order must be at least 1".into()));
    }
    let x = d.x();
    let base: Vec<&[f64]> = (0..x.q())
        .filter(|&j| !(x.has_intercept() && j == 0))
        .map(|j| x.column(j))
        .collect();
    if base.is_empty() {
        return Err(Error::Data("no covariate columns to expand".into()));
    }
    let count = interaction_count(base.len(), max_order)?;
    if count > cap as u128 {
        return Err(Error::CapExceeded {
            what: "interaction expansion",
            size: count,
            cap: cap as u128,
        });
    }

    let n = x.n();
    // One bucket per degree so concatenation yields degree-major order.
    let mut cols: Vec<Vec<Vec<f64>>> = vec![Vec::new(); max_order];
    let mut names: Vec<Vec<String>> = vec![Vec::new(); max_order];
    let mut path: Vec<usize> = Vec::new();
    let ones = vec![1.0; n];
    grow(&base, 0, max_order, &ones, &mut path, &mut cols, &mut names);

    let columns: Vec<Vec<f64>> = cols.into_iter().flatten().collect();
    let names: Vec<String> = names.into_iter().flatten().collect();
    Dataset::from_columns(columns, names, d.y().to_vec(), true)
}

/// Depth-first monomial generation. Each recursion level multiplies one
/// more base column in, keeping indices nondecreasing, and records the
/// product in the bucket of its degree.
fn grow(
    base: &[&[f64]],
    start: usize,
    levels_left: usize,
    prod: &[f64],
    path: &mut Vec<usize>,
    cols: &mut [Vec<Vec<f64>>],
    names: &mut [Vec<String>],
) {
    for i in start..base.len() {
        let next: Vec<f64> = prod.iter().zip(base[i]).map(|(p, b)| p * b).collect();
        path.push(i);
        let degree = path.len();
        names[degree - 1].push(monomial_name(path));
        cols[degree - 1].push(next.clone());
        if levels_left > 1 {
            grow(base, i, levels_left - 1, &next, path, cols, names);
        }
        path.pop();
    }
}

/// Formats a nondecreasing index tuple as `1-based^power` factors joined
/// by a middle dot, e.g. `[5, 5, 5, 5, 10]` becomes `6^4·11`.
fn monomial_name(path: &[usize]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut run_start = 0;
    for pos in 1..=path.len() {
        if pos == path.len() || path[pos] != path[run_start] {
            let power = pos - run_start;
            let index = path[run_start] + 1;
            if power == 1 {
                parts.push(format!("{index}"));
            } else {
                parts.push(format!("{index}^{power}"));
            }
            run_start = pos;
        }
    }
    parts.join("·")
}

/// Trigonometric design of `2·max_freq` columns over `n` time points:
/// for each frequency ℓ = 1..max_freq a sine column sin(πℓt/n) and a
/// cosine column cos(πℓt/n), t = 1..n, interleaved sine first.
pub fn trig_basis(n: usize, max_freq: usize, intercept: bool) -> Result<CovariateMatrix> {
    if max_freq == 0 || 2 * max_freq > n {
        return Err(Error::Domain(format!(
            "need 1 <= max_freq <= n/2, got max_freq = {max_freq}, n = {n}"
        )));
    }
    let mut columns = Vec::with_capacity(2 * max_freq);
    let mut names = Vec::with_capacity(2 * max_freq);
    for l in 1..=max_freq {
        let w = std::f64::consts::PI * l as f64 / n as f64;
        columns.push((1..=n).map(|t| (w * t as f64).sin()).collect());
        names.push(format!("sin_{l}"));
        columns.push((1..=n).map(|t| (w * t as f64).cos()).collect());
        names.push(format!("cos_{l}"));
    }
    CovariateMatrix::new(columns, names, intercept)
}

/// Period, in sample units, conventionally reported for column `c`
/// (1-based, intercept not counted) of a trigonometric design on `n`
/// points: `4n/c`.
///
/// The convention indexes the interleaved sine and cosine columns with a
/// single counter, so the pair at frequency ℓ sits at columns 2ℓ−1 and 2ℓ
/// and the reported periods bracket the true period 2n/ℓ from above and
/// below. Divide by the sampling rate for calendar units, e.g. by 12 for
/// monthly data.
pub fn trig_period(n: usize, column: usize) -> f64 {
    4.0 * n as f64 / column as f64
}

/// Builds a lagged design from equal-length named series.
///
/// Rows 1..max_lag are trimmed. The response is `target` aligned to the
/// remaining rows; for every series and every lag k = 1..max_lag there is
/// one column holding the series shifted back k steps, named
/// `"{name}, lag {k}"`. The target's own lags are included, which is what
/// autoregression needs.
pub fn lag_matrix(
    series: &[(String, Vec<f64>)],
    max_lag: usize,
    target: &str,
    intercept: bool,
) -> Result<Dataset> {
    if series.is_empty() {
        return Err(Error::Data("no series given".into()));
    }
    let len = series[0].1.len();
    for (name, values) in series {
        if values.len() != len {
            return Err(Error::Data(format!(
                "series {name} has length {}, expected {len}",
                values.len()
            )));
        }
    }
    if max_lag == 0 || max_lag >= len {
        return Err(Error::Data(format!(
            "need 1 <= max_lag < series length, got max_lag = {max_lag}, length = {len}"
        )));
    }
    let target_values = series
        .iter()
        .find(|(name, _)| name == target)
        .map(|(_, values)| values)
        .ok_or_else(|| Error::Data(format!("target series {target} not found")))?;

    let n = len - max_lag;
    let y: Vec<f64> = target_values[max_lag..].to_vec();
    let mut columns = Vec::with_capacity(series.len() * max_lag);
    let mut names = Vec::with_capacity(series.len() * max_lag);
    for (name, values) in series {
        for k in 1..=max_lag {
            columns.push(values[max_lag - k..max_lag - k + n].to_vec());
            names.push(format!("{name}, lag {k}"));
        }
    }
    Dataset::from_columns(columns, names, y, intercept)
}
