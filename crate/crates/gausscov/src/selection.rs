//! Covariate selection drivers: stepwise, all-subsets, and repeated
//! selection over a shrinking pool.

use crate::data::Dataset;
use crate::engine::{ActiveModel, CandidateScan};
use crate::error::{Error, Result};
use crate::pvalues::{leave_one_out_pvalues, step_pvalue, MemberPvalue};
use crate::specfun::Prob;
use serde::Serialize;

/// Tuning knobs for the selection drivers.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionConfig {
    /// Acceptance threshold for candidate P-values.
    pub alpha: f64,
    /// Order-statistic rank: candidates are judged against the ν-th best
    /// of the remaining noise columns instead of the best.
    pub nu: usize,
    /// Number of covariates gathered per block; blocks are then searched
    /// for their best significant sub-block. 1 gives plain stepwise.
    pub kmax: usize,
    /// Stop after this many accepted covariates.
    pub max_steps: Option<usize>,
    /// Pool size used in the P-value exponent, when it differs from the
    /// number of columns offered (for example when re-running a selection
    /// restricted to an already chosen subset).
    pub pool_size_override: Option<usize>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            alpha: 0.01,
            nu: 1,
            kmax: 1,
            max_steps: None,
            pool_size_override: None,
        }
    }
}

/// Why a selection run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TerminationReason {
    /// The best remaining candidate was consistent with Gaussian noise.
    NoSignificantCandidate,
    /// No candidates left: pool empty, all collinear, or the pool
    /// accounting ran out of room for the requested rank.
    PoolExhausted,
    /// The residual sum of squares reached zero.
    ExactFit,
    /// The configured step limit was reached.
    StepLimit,
}

/// One accepted covariate in selection order.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub index: usize,
    pub name: String,
    pub pvalue: Prob,
    /// rss after this covariate entered.
    pub rss: f64,
    /// rss divided by the rss before this covariate entered.
    pub ratio: f64,
}

/// Outcome of a selection run.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    /// rss of the empty model (squared norm of the response).
    pub rss0: f64,
    /// Pool size used in the P-value exponents.
    pub q_pool: usize,
    pub trace: Vec<TraceRow>,
    /// Leave-one-out P-values of the final subset.
    pub members: Vec<MemberPvalue>,
    pub termination: TerminationReason,
}

impl SelectionResult {
    /// Selected column indices in acceptance order.
    pub fn selected(&self) -> Vec<usize> {
        self.trace.iter().map(|r| r.index).collect()
    }
}

fn validate_config(cfg: &SelectionConfig) -> Result<()> {
    if !(cfg.alpha.is_finite() && 0.0 < cfg.alpha && cfg.alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {} outside (0, 1)", cfg.alpha)));
    }
    if cfg.nu == 0 {
        return Err(Error::Domain("rank nu must be at least 1".into()));
    }
    if cfg.kmax == 0 || cfg.kmax > 12 {
        return Err(Error::Domain(format!(
            "block size kmax {} outside 1..=12",
            cfg.kmax
        )));
    }
    Ok(())
}

/// Stepwise selection over all columns of the dataset.
///
/// A constant column in position 0 (the intercept) is accepted first
/// unconditionally; every other covariate must reach `alpha`. Each step
/// adds the candidate with the lowest resulting rss, provided the exact
/// P-value of that rss drop against `q_pool − k` noise columns clears the
/// threshold.
pub fn stepwise(d: &Dataset, cfg: &SelectionConfig) -> Result<SelectionResult> {
    let allowed: Vec<usize> = (0..d.q()).collect();
    stepwise_among(d, cfg, &allowed)
}

/// Stepwise selection restricted to the given column indices.
pub fn stepwise_among(d: &Dataset, cfg: &SelectionConfig, allowed: &[usize]) -> Result<SelectionResult> {
    stepwise_core(d.x(), d.y(), cfg, allowed)
}

/// Stepwise selection of columns of `x` to approximate an arbitrary
/// response slice. The workhorse behind [`stepwise`] and the per-node
/// regressions of dependency graphs.
pub fn stepwise_core(
    x: &crate::data::CovariateMatrix,
    y: &[f64],
    cfg: &SelectionConfig,
    allowed: &[usize],
) -> Result<SelectionResult> {
    validate_config(cfg)?;
    if y.len() != x.n() {
        return Err(Error::Data(format!(
            "response length {} does not match {} rows",
            y.len(),
            x.n()
        )));
    }
    for &c in allowed {
        if c >= x.q() {
            return Err(Error::Data(format!("column index {c} out of range")));
        }
    }
    let q_pool = cfg.pool_size_override.unwrap_or(allowed.len());
    let mut model = ActiveModel::from_response(y);
    let rss0 = model.rss();
    let mut trace = Vec::new();
    let mut in_model = vec![false; x.q()];

    if rss0 == 0.0 {
        return Ok(SelectionResult {
            rss0,
            q_pool,
            trace,
            members: Vec::new(),
            termination: TerminationReason::ExactFit,
        });
    }

    let force_intercept = x.has_intercept() && allowed.contains(&0);
    let termination = if cfg.kmax == 1 {
        stepwise_plain(x, cfg, allowed, q_pool, force_intercept, &mut model, &mut trace, &mut in_model)?
    } else {
        stepwise_blocks(x, cfg, allowed, q_pool, force_intercept, &mut model, &mut trace, &mut in_model)?
    };

    let members = if model.k() > 0 {
        leave_one_out_pvalues(&model, x, q_pool, cfg.nu)?
    } else {
        Vec::new()
    };
    Ok(SelectionResult {
        rss0,
        q_pool,
        trace,
        members,
        termination,
    })
}

/// Pool room left for a model of size `k`: the P-value needs at least
/// `nu` competitors.
fn pool_has_room(q_pool: usize, k: usize, nu: usize) -> bool {
    q_pool > k && q_pool - k >= nu
}

#[allow(clippy::too_many_arguments)]
fn stepwise_plain(
    x: &crate::data::CovariateMatrix,
    cfg: &SelectionConfig,
    allowed: &[usize],
    q_pool: usize,
    force_intercept: bool,
    model: &mut ActiveModel,
    trace: &mut Vec<TraceRow>,
    in_model: &mut [bool],
) -> Result<TerminationReason> {
    let n = x.n();
    let mut scan = CandidateScan::new(model, x);

    if force_intercept {
        let prev = model.rss();
        let cand = scan.rss(model, x, 0);
        let pvalue = if pool_has_room(q_pool, 0, cfg.nu) {
            step_pvalue(prev, cand.rss, n, 0, q_pool, cfg.nu)?
        } else {
            Prob::clamped(1.0)
        };
        let step = model.add_covariate(x, 0)?;
        scan.update(model, x, step);
        in_model[0] = true;
        trace.push(TraceRow {
            index: 0,
            name: x.name(0).to_string(),
            pvalue,
            rss: model.rss(),
            ratio: model.rss() / prev,
        });
    }

    loop {
        if model.rss() == 0.0 {
            return Ok(TerminationReason::ExactFit);
        }
        if let Some(limit) = cfg.max_steps {
            if trace.len() >= limit {
                return Ok(TerminationReason::StepLimit);
            }
        }
        let k = model.k();
        if !pool_has_room(q_pool, k, cfg.nu) {
            return Ok(TerminationReason::PoolExhausted);
        }
        let mut best: Option<(f64, usize)> = None;
        for &c in allowed {
            if in_model[c] {
                continue;
            }
            let cand = scan.rss(model, x, c);
            if cand.collinear {
                continue;
            }
            let key = (cand.rss, c);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        let Some((best_rss, best_idx)) = best else {
            return Ok(TerminationReason::PoolExhausted);
        };
        let prev = model.rss();
        let pvalue = step_pvalue(prev, best_rss, n, k, q_pool, cfg.nu)?;
        if pvalue.value() > cfg.alpha {
            return Ok(TerminationReason::NoSignificantCandidate);
        }
        let step = model.add_covariate(x, best_idx)?;
        scan.update(model, x, step);
        in_model[best_idx] = true;
        trace.push(TraceRow {
            index: best_idx,
            name: x.name(best_idx).to_string(),
            pvalue,
            rss: model.rss(),
            ratio: model.rss() / prev,
        });
    }
}

#[allow(clippy::too_many_arguments)]
fn stepwise_blocks(
    x: &crate::data::CovariateMatrix,
    cfg: &SelectionConfig,
    allowed: &[usize],
    q_pool: usize,
    force_intercept: bool,
    model: &mut ActiveModel,
    trace: &mut Vec<TraceRow>,
    in_model: &mut [bool],
) -> Result<TerminationReason> {
    let n = x.n();

    if force_intercept {
        let prev = model.rss();
        let cand = model.candidate_rss(x, &[0])[0];
        let pvalue = if pool_has_room(q_pool, 0, cfg.nu) {
            step_pvalue(prev, cand.rss, n, 0, q_pool, cfg.nu)?
        } else {
            Prob::clamped(1.0)
        };
        model.add_covariate(x, 0)?;
        in_model[0] = true;
        trace.push(TraceRow {
            index: 0,
            name: x.name(0).to_string(),
            pvalue,
            rss: model.rss(),
            ratio: model.rss() / prev,
        });
    }

    loop {
        if model.rss() == 0.0 {
            return Ok(TerminationReason::ExactFit);
        }
        if let Some(limit) = cfg.max_steps {
            if trace.len() >= limit {
                return Ok(TerminationReason::StepLimit);
            }
        }
        let base_k = model.k();

        // Gather up to kmax covariates greedily, ignoring significance.
        let mut block = Vec::new();
        for _ in 0..cfg.kmax {
            if model.rss() == 0.0 || !pool_has_room(q_pool, model.k(), cfg.nu) {
                break;
            }
            let remaining: Vec<usize> = allowed
                .iter()
                .copied()
                .filter(|&c| !in_model[c] && !block.contains(&c))
                .collect();
            if remaining.is_empty() {
                break;
            }
            let scan = model.candidate_rss(x, &remaining);
            let best = scan
                .iter()
                .filter(|c| !c.collinear)
                .min_by(|a, b| (a.rss, a.index).partial_cmp(&(b.rss, b.index)).unwrap());
            let Some(best) = best else { break };
            model.add_covariate(x, best.index)?;
            block.push(best.index);
        }
        model.truncate(base_k);
        if block.is_empty() {
            return Ok(TerminationReason::PoolExhausted);
        }

        // Search every nonempty sub-block for the largest significant
        // rss drop: all its members must pass leave-one-out at alpha.
        let mut best_subset: Option<(f64, Vec<usize>)> = None;
        'subset: for mask in 1u32..(1 << block.len()) {
            let members: Vec<usize> = block
                .iter()
                .enumerate()
                .filter(|(pos, _)| mask >> pos & 1 == 1)
                .map(|(_, &c)| c)
                .collect();
            for &c in &members {
                if model.add_covariate(x, c).is_err() {
                    model.truncate(base_k);
                    continue 'subset;
                }
            }
            let verdict = leave_one_out_pvalues(model, x, q_pool, cfg.nu);
            let rss = model.rss();
            model.truncate(base_k);
            let rows = match verdict {
                Ok(rows) => rows,
                Err(_) => continue,
            };
            let all_pass = rows
                .iter()
                .filter(|r| members.contains(&r.index))
                .all(|r| r.adjusted.value() <= cfg.alpha);
            if all_pass && best_subset.as_ref().map_or(true, |(r, _)| rss < *r) {
                best_subset = Some((rss, members));
            }
        }
        let Some((_, chosen)) = best_subset else {
            return Ok(TerminationReason::NoSignificantCandidate);
        };

        // Re-add the chosen members one at a time, best rss drop first,
        // recording a trace row for each.
        let mut pending = chosen;
        while !pending.is_empty() {
            let scan = model.candidate_rss(x, &pending);
            let best = scan
                .iter()
                .filter(|c| !c.collinear)
                .min_by(|a, b| (a.rss, a.index).partial_cmp(&(b.rss, b.index)).unwrap())
                .copied();
            let Some(best) = best else { break };
            let prev = model.rss();
            let pvalue = step_pvalue(prev, best.rss, n, model.k(), q_pool, cfg.nu)?;
            model.add_covariate(x, best.index)?;
            in_model[best.index] = true;
            pending.retain(|&c| c != best.index);
            trace.push(TraceRow {
                index: best.index,
                name: x.name(best.index).to_string(),
                pvalue,
                rss: model.rss(),
                ratio: model.rss() / prev,
            });
        }
    }
}

/// A subset found by the exhaustive search, with its member P-values.
#[derive(Debug, Clone, Serialize)]
pub struct SubsetRecord {
    /// Column indices, intercept first when present.
    pub members: Vec<usize>,
    pub rss: f64,
    pub pvalues: Vec<MemberPvalue>,
}

/// Exhaustive search over all subsets of the non-constant columns.
///
/// A subset qualifies when every member is individually significant at
/// `alpha` after adjusting for the full pool; of the qualifying subsets
/// only the maximal ones (not contained in a larger qualifying subset)
/// are returned, ordered by rss. The intercept, when present, joins every
/// subset but is not itself gated.
///
/// The search is exponential in the number of columns and refuses to run
/// above `cap` columns.
pub fn all_subsets(d: &Dataset, alpha: f64, nu: usize, cap: usize) -> Result<Vec<SubsetRecord>> {
    if !(alpha.is_finite() && 0.0 < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 1)")));
    }
    if nu == 0 {
        return Err(Error::Domain("rank nu must be at least 1".into()));
    }
    let x = d.x();
    let candidates: Vec<usize> = if x.has_intercept() {
        (1..x.q()).collect()
    } else {
        (0..x.q()).collect()
    };
    if candidates.len() > cap {
        return Err(Error::CapExceeded {
            what: "all-subsets column count",
            size: candidates.len() as u128,
            cap: cap as u128,
        });
    }
    if candidates.len() > 63 {
        return Err(Error::CapExceeded {
            what: "all-subsets column count",
            size: candidates.len() as u128,
            cap: 63,
        });
    }
    let q_pool = x.q();
    let mut model = ActiveModel::new(d);
    if model.rss() == 0.0 {
        return Err(Error::Data("response has zero variance".into()));
    }
    if x.has_intercept() {
        model.add_covariate(x, 0)?;
    }
    let mut passing: Vec<(u64, f64)> = Vec::new();

    fn dfs(
        d: &Dataset,
        candidates: &[usize],
        start: usize,
        mask: u64,
        alpha: f64,
        nu: usize,
        q_pool: usize,
        model: &mut ActiveModel,
        passing: &mut Vec<(u64, f64)>,
    ) -> Result<()> {
        let x = d.x();
        let n = x.n();
        for pos in start..candidates.len() {
            let c = candidates[pos];
            match model.add_covariate(x, c) {
                Ok(_) => {}
                Err(Error::Collinear { .. }) => continue,
                Err(e) => return Err(e),
            }
            let mask = mask | 1 << pos;
            let k = model.k();
            if model.rss() > 0.0 && k < n && q_pool >= k && q_pool - (k - 1) >= nu {
                let rows = leave_one_out_pvalues(model, x, q_pool, nu)?;
                let all_pass = rows
                    .iter()
                    .filter(|r| !(x.has_intercept() && r.index == 0))
                    .all(|r| r.adjusted.value() <= alpha);
                if all_pass {
                    passing.push((mask, model.rss()));
                }
            }
            dfs(d, candidates, pos + 1, mask, alpha, nu, q_pool, model, passing)?;
            model.truncate(model.k() - 1);
        }
        Ok(())
    }

    dfs(d, &candidates, 0, 0, alpha, nu, q_pool, &mut model, &mut passing)?;
    model.truncate(if x.has_intercept() { 1 } else { 0 });

    // Keep only maximal qualifying subsets.
    let mut keep: Vec<(u64, f64)> = Vec::new();
    for &(mask, rss) in &passing {
        let dominated = passing
            .iter()
            .any(|&(other, _)| other != mask && other & mask == mask);
        if !dominated {
            keep.push((mask, rss));
        }
    }
    keep.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut out = Vec::with_capacity(keep.len());
    for (mask, _) in keep {
        let mut members: Vec<usize> = Vec::new();
        if x.has_intercept() {
            members.push(0);
        }
        members.extend(
            candidates
                .iter()
                .enumerate()
                .filter(|(pos, _)| mask >> pos & 1 == 1)
                .map(|(_, &c)| c),
        );
        let mut m = ActiveModel::new(d);
        for &c in &members {
            m.add_covariate(x, c)?;
        }
        let pvalues = leave_one_out_pvalues(&m, x, q_pool, nu)?;
        out.push(SubsetRecord {
            members,
            rss: m.rss(),
            pvalues,
        });
    }
    Ok(out)
}

/// One round of repeated selection: a full stepwise run and the pool it
/// was offered.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionRound {
    pub round: usize,
    pub result: SelectionResult,
}

/// Repeated stepwise selection over a shrinking pool.
///
/// After each round the selected covariates (except the intercept, which
/// stays available) are removed from the pool and the selection runs
/// again, producing alternative approximations of the response until a
/// round selects nothing new.
pub fn repeated_stepwise(
    d: &Dataset,
    cfg: &SelectionConfig,
    max_rounds: Option<usize>,
) -> Result<Vec<SelectionRound>> {
    validate_config(cfg)?;
    let x = d.x();
    let mut available: Vec<bool> = vec![true; x.q()];
    let mut rounds = Vec::new();
    let mut round = 0;
    loop {
        if let Some(limit) = max_rounds {
            if round >= limit {
                break;
            }
        }
        let allowed: Vec<usize> = (0..x.q()).filter(|&c| available[c]).collect();
        let non_intercept_left = allowed
            .iter()
            .any(|&c| !(x.has_intercept() && c == 0));
        if allowed.is_empty() || !non_intercept_left {
            break;
        }
        let result = stepwise_among(d, cfg, &allowed)?;
        let selected = result.selected();
        let new_columns: Vec<usize> = selected
            .iter()
            .copied()
            .filter(|&c| !(x.has_intercept() && c == 0))
            .collect();
        if new_columns.is_empty() {
            break;
        }
        for &c in &new_columns {
            available[c] = false;
        }
        rounds.push(SelectionRound { round, result });
        round += 1;
    }
    Ok(rounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian_dataset(seed: u64, n: usize, q: usize, intercept: bool) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..q)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let names = (0..q).map(|j| format!("x{j}")).collect();
        Dataset::from_columns(cols, names, y, intercept).unwrap()
    }

    fn planted_dataset(seed: u64, n: usize, q: usize, signal: &[(usize, f64)]) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..q)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let noise: f64 = rng.sample(StandardNormal);
                signal.iter().map(|&(j, a)| a * cols[j][i]).sum::<f64>() + noise
            })
            .collect();
        let names = (0..q).map(|j| format!("x{j}")).collect();
        Dataset::from_columns(cols, names, y, true).unwrap()
    }

    #[test]
    fn planted_signal_is_found_first() {
        let d = planted_dataset(3, 200, 15, &[(5, 3.0)]);
        let r = stepwise(&d, &SelectionConfig::default()).unwrap();
        assert_eq!(r.trace[0].index, 0, "intercept first");
        assert_eq!(r.trace[1].index, 6, "signal column (shifted by intercept)");
        assert!(r.trace[1].pvalue.value() < 1e-10);
        assert_eq!(r.termination, TerminationReason::NoSignificantCandidate);
        for w in r.trace.windows(2) {
            assert!(w[1].rss <= w[0].rss);
            assert!((w[1].ratio - w[1].rss / w[0].rss).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_noise_selects_nothing() {
        let mut empty = 0;
        for seed in 0..20 {
            let d = gaussian_dataset(seed, 60, 30, true);
            let r = stepwise(&d, &SelectionConfig::default()).unwrap();
            if r.trace.len() == 1 {
                empty += 1;
            }
        }
        // At alpha = 0.01 a false positive shows up in about 1% of runs.
        assert!(empty >= 18, "only {empty}/20 noise runs stayed empty");
    }

    #[test]
    fn intercept_is_forced_even_when_insignificant() {
        let d = gaussian_dataset(11, 50, 10, true);
        let r = stepwise(&d, &SelectionConfig::default()).unwrap();
        assert_eq!(r.trace[0].index, 0);
    }

    #[test]
    fn restricting_pool_to_selected_prefix_reproduces_trace() {
        let d = planted_dataset(17, 150, 12, &[(2, 1.5), (7, 1.0), (9, 0.7)]);
        let cfg = SelectionConfig::default();
        let full = stepwise(&d, &cfg).unwrap();
        assert!(full.trace.len() >= 3);
        let prefix: Vec<usize> = full.trace.iter().take(3).map(|r| r.index).collect();
        let restricted_cfg = SelectionConfig {
            pool_size_override: Some(full.q_pool),
            ..cfg
        };
        let restricted = stepwise_among(&d, &restricted_cfg, &prefix).unwrap();
        for (a, b) in full.trace.iter().take(3).zip(&restricted.trace) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.rss.to_bits(), b.rss.to_bits(), "rss must match bitwise");
            assert_eq!(a.pvalue.value().to_bits(), b.pvalue.value().to_bits());
        }
    }

    #[test]
    fn masked_columns_are_never_selected() {
        let d = planted_dataset(23, 120, 10, &[(4, 2.0)]);
        let allowed: Vec<usize> = (0..d.q()).filter(|&c| c != 5).collect();
        let r = stepwise_among(&d, &SelectionConfig::default(), &allowed).unwrap();
        assert!(r.selected().iter().all(|&c| c != 5));
        assert_eq!(r.q_pool, d.q() - 1);
    }

    #[test]
    fn block_selection_recovers_masked_pair() {
        // Two nearly collinear columns whose difference carries the
        // signal: each is marginally too weak to pass on its own, but the
        // pair is decisive.
        let n = 300;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let base: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let twin: Vec<f64> = base
            .iter()
            .map(|v| v + 0.25 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut cols: Vec<Vec<f64>> = vec![base.clone(), twin.clone()];
        for _ in 2..10 {
            cols.push((0..n).map(|_| rng.sample(StandardNormal)).collect());
        }
        let y: Vec<f64> = (0..n)
            .map(|i| 3.0 * (base[i] - twin[i]) + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let names = (0..10).map(|j| format!("x{j}")).collect();
        let d = Dataset::from_columns(cols, names, y, true).unwrap();
        let cfg = SelectionConfig {
            alpha: 0.001,
            ..SelectionConfig::default()
        };

        let plain = stepwise(&d, &cfg).unwrap();
        assert!(
            plain.trace.len() < 3,
            "plain stepwise should miss the pair, selected {:?}",
            plain.selected()
        );
        let blocked = stepwise(&d, &SelectionConfig { kmax: 2, ..cfg }).unwrap();
        let mut blocked_sel: Vec<usize> = blocked
            .selected()
            .into_iter()
            .filter(|&c| c != 0)
            .collect();
        blocked_sel.sort_unstable();
        assert!(
            blocked_sel.starts_with(&[1, 2]),
            "block search should find the pair, got {blocked_sel:?}"
        );
    }

    #[test]
    fn repeated_rounds_use_disjoint_covariates() {
        let d = planted_dataset(41, 500, 8, &[(1, 2.0), (3, 1.5), (6, 1.0)]);
        let rounds = repeated_stepwise(&d, &SelectionConfig::default(), None).unwrap();
        assert!(!rounds.is_empty());
        let mut seen = std::collections::HashSet::new();
        for round in &rounds {
            for &c in &round.result.selected() {
                if c == 0 {
                    continue; // intercept reappears every round
                }
                assert!(seen.insert(c), "column {c} selected twice");
            }
        }
        for (i, round) in rounds.iter().enumerate() {
            assert_eq!(round.round, i);
        }
    }

    #[test]
    fn all_subsets_requires_every_member_significant() {
        let d = planted_dataset(47, 100, 6, &[(2, 2.0), (4, 1.5)]);
        let subsets = all_subsets(&d, 0.01, 1, 25).unwrap();
        assert!(!subsets.is_empty());
        for s in &subsets {
            assert_eq!(s.members[0], 0, "intercept joins every subset");
            for p in s.pvalues.iter().filter(|p| p.index != 0) {
                assert!(
                    p.adjusted.value() <= 0.01,
                    "member {} not significant in {:?}",
                    p.index,
                    s.members
                );
            }
        }
        for w in subsets.windows(2) {
            assert!(w[0].rss <= w[1].rss);
        }
        // Maximality: no returned subset strictly contains another.
        for a in &subsets {
            for b in &subsets {
                if a.members != b.members {
                    let a_set: std::collections::HashSet<_> = a.members.iter().collect();
                    assert!(
                        !b.members.iter().all(|m| a_set.contains(m)),
                        "{:?} contains {:?}",
                        a.members,
                        b.members
                    );
                }
            }
        }
    }

    #[test]
    fn all_subsets_refuses_oversized_input() {
        let d = gaussian_dataset(53, 40, 30, false);
        match all_subsets(&d, 0.01, 1, 25) {
            Err(Error::CapExceeded { size, cap, .. }) => {
                assert_eq!(size, 30);
                assert_eq!(cap, 25);
            }
            other => panic!("expected CapExceeded, got {other:?}"),
        }
    }

    #[test]
    fn step_limit_terminates_early() {
        let d = planted_dataset(59, 300, 10, &[(1, 2.0), (4, 1.5), (7, 1.2)]);
        let r = stepwise(
            &d,
            &SelectionConfig {
                max_steps: Some(2),
                ..SelectionConfig::default()
            },
        )
        .unwrap();
        assert_eq!(r.trace.len(), 2);
        assert_eq!(r.termination, TerminationReason::StepLimit);
    }
}
