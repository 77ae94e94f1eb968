//! Simulation harnesses: null-calibration of the selection procedure on
//! pure-noise designs, the Toeplitz planted-support benchmark, a spatial
//! random-graph benchmark for dependency graphs, a correlated-error study
//! on a trigonometric design, and small Monte-Carlo oracles used by the
//! test suites to validate the closed-form P-values and the equivalence
//! region coverage.
//!
//! Every harness is deterministic: replication `i` draws from stream `i+1`
//! of a counter-based generator seeded by the config, so parallel and
//! serial runs produce identical reports.

use crate::data::{CovariateMatrix, Dataset};
use crate::engine::ActiveModel;
use crate::equivalence::equiv_contains;
use crate::error::{Error, Result};
use crate::featuregen::trig_basis;
use crate::graphs::{dependency_graph, GraphConfig};
use crate::selection::{stepwise, stepwise_core, SelectionConfig};
use crate::specfun::Prob;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

fn rep_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Scenario description for the noise-calibration and planted-support
/// simulations.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    /// Observations per replication.
    pub n: usize,
    /// Covariate columns per replication (intercept not counted).
    pub q: usize,
    pub alpha: f64,
    /// Order-statistic rank passed to the selection.
    pub nu: usize,
    pub nsim: usize,
    pub seed: u64,
    /// Planted-support size (Toeplitz benchmark only).
    pub p: usize,
    /// Signal scale; planted coefficients are `amplitude/√n`.
    pub amplitude: f64,
    /// Toeplitz correlation: column j and column l correlate as ρ^|j−l|.
    pub rho: f64,
    pub intercept: bool,
    /// Draw the response once and reuse it across replications instead of
    /// drawing it fresh per replication.
    pub fixed_y: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 1000,
            q: 1000,
            alpha: 0.01,
            nu: 1,
            nsim: 100,
            seed: 1,
            p: 0,
            amplitude: 0.0,
            rho: 0.0,
            intercept: false,
            fixed_y: false,
        }
    }
}

impl SimConfig {
    /// The planted-support benchmark's published setting: 60 signal
    /// columns of size 4.5/√n in a Toeplitz design with ρ = 0.25.
    pub fn toeplitz_benchmark() -> Self {
        SimConfig {
            p: 60,
            amplitude: 4.5,
            rho: 0.25,
            intercept: true,
            nsim: 25,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && 0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.nsim == 0 {
            return Err(Error::Domain("nsim must be at least 1".into()));
        }
        if self.n < 4 || self.q == 0 {
            return Err(Error::Domain(format!(
                "degenerate scenario size n={}, q={}",
                self.n, self.q
            )));
        }
        if self.nu == 0 {
            return Err(Error::Domain("nu must be at least 1".into()));
        }
        if self.p > self.q {
            return Err(Error::Domain(format!(
                "planted support {} exceeds q={}",
                self.p, self.q
            )));
        }
        if !(self.rho.is_finite() && self.rho.abs() < 1.0) {
            return Err(Error::Domain(format!("rho {} outside (-1, 1)", self.rho)));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Domain("amplitude must be finite".into()));
        }
        Ok(())
    }
}

/// One replication's scores.
#[derive(Debug, Clone, Serialize)]
pub struct RepRecord {
    pub rep: usize,
    /// Selected columns outside the planted support.
    pub fp: usize,
    /// Planted columns the selection missed.
    #[serde(rename = "fn")]
    pub false_negatives: usize,
    /// Selected columns, intercept not counted.
    pub selected: usize,
    /// Wall-clock seconds of the selection call alone.
    pub seconds: f64,
}

/// Replication records with their summary statistics.
#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub nsim: usize,
    pub mean_fp: f64,
    pub sd_fp: f64,
    pub mean_fn: f64,
    pub sd_fn: f64,
    /// Fraction of replications with no false positive at all.
    pub p_zero_fp: f64,
    pub mean_seconds: f64,
    /// `histogram[c]` counts replications with exactly `c` false
    /// positives; entries sum to `nsim`.
    pub histogram: Vec<usize>,
    pub reps: Vec<RepRecord>,
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = values.map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn summarize(reps: Vec<RepRecord>) -> SimReport {
    let nsim = reps.len();
    let (mean_fp, sd_fp) = mean_sd(reps.iter().map(|r| r.fp as f64), nsim);
    let (mean_fn, sd_fn) = mean_sd(reps.iter().map(|r| r.false_negatives as f64), nsim);
    let mean_seconds = reps.iter().map(|r| r.seconds).sum::<f64>() / nsim as f64;
    let p_zero_fp = reps.iter().filter(|r| r.fp == 0).count() as f64 / nsim as f64;
    let max_fp = reps.iter().map(|r| r.fp).max().unwrap_or(0);
    let mut histogram = vec![0usize; max_fp + 1];
    for r in &reps {
        histogram[r.fp] += 1;
    }
    SimReport {
        nsim,
        mean_fp,
        sd_fp,
        mean_fn,
        sd_fn,
        p_zero_fp,
        mean_seconds,
        histogram,
        reps,
    }
}

fn column_names(q: usize) -> Vec<String> {
    (1..=q).map(|j| format!("x{j}")).collect()
}

/// Null calibration: regresses a signal-free response on `q` pure
/// Gaussian covariates, so every selection is a false positive.
///
/// The response is drawn standard Gaussian per replication (the method is
/// model-free in the response, so its distribution is immaterial); with
/// `fixed_y` one response is drawn up front and shared instead.
pub fn fsimords(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let fixed: Option<Vec<f64>> = if cfg.fixed_y {
        Some(gaussian_vec(&mut rep_rng(cfg.seed, 0), cfg.n))
    } else {
        None
    };
    let sel_cfg = SelectionConfig {
        alpha: cfg.alpha,
        nu: cfg.nu,
        ..SelectionConfig::default()
    };
    let names = column_names(cfg.q);
    let reps: Result<Vec<RepRecord>> = (0..cfg.nsim)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(cfg.seed, rep as u64 + 1);
            let cols: Vec<Vec<f64>> = (0..cfg.q).map(|_| gaussian_vec(&mut rng, cfg.n)).collect();
            let y = match &fixed {
                Some(y) => y.clone(),
                None => gaussian_vec(&mut rng, cfg.n),
            };
            let d = Dataset::from_columns(cols, names.clone(), y, cfg.intercept)?;
            let clock = Instant::now();
            let result = stepwise(&d, &sel_cfg)?;
            let seconds = clock.elapsed().as_secs_f64();
            let picks = result
                .selected()
                .into_iter()
                .filter(|&j| !(cfg.intercept && j == 0))
                .count();
            Ok(RepRecord {
                rep,
                fp: picks,
                false_negatives: 0,
                selected: picks,
                seconds,
            })
        })
        .collect();
    Ok(summarize(reps?))
}

/// Planted-support benchmark on a Toeplitz design.
///
/// Each row follows the AR(1) recursion across the column index,
/// `X_j = ρX_{j−1} + √(1−ρ²)Z_j`, which renders the Toeplitz covariance
/// ρ^|j−l| exactly. `p` support columns are drawn uniformly per
/// replication and carry coefficient `amplitude/√n`; false positives and
/// false negatives are scored against that support, never counting the
/// intercept.
pub fn tutorial1(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let beta = cfg.amplitude / (cfg.n as f64).sqrt();
    let sel_cfg = SelectionConfig {
        alpha: cfg.alpha,
        nu: cfg.nu,
        ..SelectionConfig::default()
    };
    let names = column_names(cfg.q);
    let offset = usize::from(cfg.intercept);
    let reps: Result<Vec<RepRecord>> = (0..cfg.nsim)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(cfg.seed, rep as u64 + 1);
            let mut cols = vec![vec![0.0f64; cfg.n]; cfg.q];
            let fresh = (1.0 - cfg.rho * cfg.rho).sqrt();
            for t in 0..cfg.n {
                let mut value: f64 = rng.sample(StandardNormal);
                cols[0][t] = value;
                for col in cols.iter_mut().skip(1) {
                    value = cfg.rho * value + fresh * rng.sample::<f64, _>(StandardNormal);
                    col[t] = value;
                }
            }
            let mut support = rand::seq::index::sample(&mut rng, cfg.q, cfg.p).into_vec();
            support.sort_unstable();
            let y: Vec<f64> = (0..cfg.n)
                .map(|t| {
                    let signal: f64 = support.iter().map(|&j| beta * cols[j][t]).sum();
                    signal + rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            let d = Dataset::from_columns(cols, names.clone(), y, cfg.intercept)?;
            let clock = Instant::now();
            let result = stepwise(&d, &sel_cfg)?;
            let seconds = clock.elapsed().as_secs_f64();
            let picked: Vec<usize> = result
                .selected()
                .into_iter()
                .filter(|&j| !(cfg.intercept && j == 0))
                .map(|j| j - offset)
                .collect();
            let fp = picked.iter().filter(|j| !support.contains(j)).count();
            let missed = support.iter().filter(|j| !picked.contains(j)).count();
            Ok(RepRecord {
                rep,
                fp,
                false_negatives: missed,
                selected: picked.len(),
                seconds,
            })
        })
        .collect();
    Ok(summarize(reps?))
}

/// Scenario for the spatial random-graph benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct GraphBenchConfig {
    /// Samples drawn from the graphical model.
    pub n: usize,
    /// Nodes, placed uniformly on the unit square.
    pub q: usize,
    pub alpha: f64,
    pub nu: usize,
    /// Per-node threshold override; defaults to `alpha/q`.
    pub per_node_alpha: Option<f64>,
    /// Edge probability between nodes at distance d is
    /// `exp(−(kernel_scale·d)²/2)`.
    pub kernel_scale: f64,
    /// Off-diagonal weight of the precision matrix on edges.
    pub coupling: f64,
    /// Optional cap: edges are pruned in random order so no node exceeds
    /// this degree. The published run uses no cap; positive definiteness
    /// of the precision matrix is checked either way.
    pub max_degree: Option<usize>,
    pub seed: u64,
}

impl Default for GraphBenchConfig {
    fn default() -> Self {
        GraphBenchConfig {
            n: 1000,
            q: 600,
            alpha: 0.01,
            nu: 1,
            per_node_alpha: None,
            kernel_scale: 23.5,
            coupling: 0.245,
            max_degree: None,
            seed: 1,
        }
    }
}

/// Edge recovery scores of one graph-benchmark run.
#[derive(Debug, Clone, Serialize)]
pub struct GraphBenchReport {
    pub true_edges: usize,
    pub found_edges: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Diagonal of the precision matrix after inflation to positive
    /// definiteness. The partial correlation on each edge is
    /// `coupling / precision_diagonal`.
    pub precision_diagonal: f64,
    pub seconds: f64,
}

/// Top eigenvalue of `shift·I + sign·A` by power iteration, where `A` is
/// the adjacency matrix of `edges` over `q` nodes. The callers choose
/// `shift` and `sign` so that the dominant eigenvalue is the one sought:
/// for a nonnegative symmetric matrix the spectral radius equals the top
/// eigenvalue, so iterating on `A` itself yields its largest eigenvalue,
/// and iterating on `λ_max·I − A` yields `λ_max − λ_min`.
fn power_top<R: Rng>(
    q: usize,
    edges: &[(usize, usize)],
    shift: f64,
    sign: f64,
    rng: &mut R,
) -> f64 {
    if edges.is_empty() {
        return shift;
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v: Vec<f64> = (0..q).map(|_| rng.gen::<f64>() - 0.5).collect();
    let n0 = norm(&v);
    for x in v.iter_mut() {
        *x /= n0;
    }
    let mut w = vec![0.0f64; q];
    let mut estimate = shift;
    for _ in 0..2000 {
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi = shift * vi;
        }
        for &(i, j) in edges {
            w[i] += sign * v[j];
            w[j] += sign * v[i];
        }
        let lam: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (lam - estimate).abs() <= 1e-9 * lam.abs().max(1.0) {
            return lam;
        }
        estimate = lam;
    }
    estimate
}

fn dense_cholesky(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let m = a.len();
    for j in 0..m {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in (j + 1)..m {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
        for i in 0..j {
            a[i][j] = 0.0;
        }
    }
    Some(a)
}

/// Spatial random-graph benchmark for the dependency-graph procedure.
///
/// Nodes are placed uniformly on the unit square; each pair becomes a
/// candidate edge with probability `exp(−(kernel_scale·d)²/2)`, and
/// candidates are kept in random order subject to the optional
/// `max_degree` cap.
/// The kept edges define a precision matrix with unit diagonal and
/// `coupling` on the edges; `n` samples of the resulting Gaussian field
/// are handed to [`dependency_graph`], and the undirected edges it finds
/// are scored against the kept set.
pub fn random_graph_bench(cfg: &GraphBenchConfig) -> Result<GraphBenchReport> {
    if cfg.q < 2 {
        return Err(Error::Domain(format!("need at least 2 nodes, got {}", cfg.q)));
    }
    if !(cfg.kernel_scale.is_finite() && cfg.kernel_scale > 0.0) {
        return Err(Error::Domain(format!(
            "kernel scale must be positive, got {}",
            cfg.kernel_scale
        )));
    }
    if !cfg.coupling.is_finite() {
        return Err(Error::Domain(format!(
            "coupling must be finite, got {}",
            cfg.coupling
        )));
    }
    let q = cfg.q;
    let mut rng = rep_rng(cfg.seed, 0);
    let points: Vec<(f64, f64)> = (0..q).map(|_| (rng.gen(), rng.gen())).collect();
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for i in 0..q {
        for j in (i + 1)..q {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            let d2 = dx * dx + dy * dy;
            let prob = (-0.5 * cfg.kernel_scale * cfg.kernel_scale * d2).exp();
            if rng.gen::<f64>() < prob {
                candidates.push((i, j));
            }
        }
    }
    candidates.shuffle(&mut rng);
    let cap = cfg.max_degree.unwrap_or(usize::MAX);
    let mut degree = vec![0usize; q];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (i, j) in candidates {
        if degree[i] < cap && degree[j] < cap {
            degree[i] += 1;
            degree[j] += 1;
            edges.push((i, j));
        }
    }

    // Precision matrix K = I + coupling on edges; samples have covariance
    // K⁻¹, drawn by solving Lᵀx = z for K = LLᵀ.
    let mut precision = vec![vec![0.0f64; q]; q];
    for (row, cell) in precision.iter_mut().enumerate() {
        cell[row] = 1.0;
    }
    for &(i, j) in &edges {
        precision[i][j] = cfg.coupling;
        precision[j][i] = cfg.coupling;
    }
    let chol = dense_cholesky(precision).ok_or_else(|| Error::NonConvergence {
        routine: "random_graph_bench",
        detail: "precision matrix is not positive definite".into(),
    })?;
    let mut cols = vec![vec![0.0f64; cfg.n]; q];
    let mut x = vec![0.0f64; q];
    for t in 0..cfg.n {
        let z = gaussian_vec(&mut rng, q);
        for i in (0..q).rev() {
            let mut s = z[i];
            for k in (i + 1)..q {
                s -= chol[k][i] * x[k];
            }
            x[i] = s / chol[i][i];
        }
        for (i, col) in cols.iter_mut().enumerate() {
            col[t] = x[i];
        }
    }
    let names = (0..q).map(|i| format!("node{i}")).collect();
    let matrix = CovariateMatrix::new(cols, names, true)?;

    let graph_cfg = GraphConfig {
        alpha: cfg.alpha,
        per_node_alpha: cfg.per_node_alpha,
        nu: cfg.nu,
        repeated: false,
        symmetrize: true,
        max_steps: None,
    };
    let clock = Instant::now();
    let graph = dependency_graph(&matrix, &graph_cfg)?;
    let seconds = clock.elapsed().as_secs_f64();

    // Graph edges carry column indices; the intercept shifts nodes by one.
    let found: Vec<(usize, usize)> = graph
        .undirected_edges()
        .into_iter()
        .map(|(a, b)| (a - 1, b - 1))
        .collect();
    let truth: std::collections::HashSet<(usize, usize)> = edges.iter().copied().collect();
    let fp = found.iter().filter(|e| !truth.contains(e)).count();
    let hits = found.len() - fp;
    Ok(GraphBenchReport {
        true_edges: edges.len(),
        found_edges: found.len(),
        false_positives: fp,
        false_negatives: edges.len() - hits,
        seconds,
    })
}

/// Scenario for the correlated-error study on the trigonometric design.
#[derive(Debug, Clone, Serialize)]
pub struct CorrStudyConfig {
    /// Observations; the design has `2·max_freq` trigonometric columns
    /// plus an intercept.
    pub n: usize,
    pub max_freq: usize,
    pub nsim: usize,
    pub alpha: f64,
    pub nu: usize,
    pub seed: u64,
    /// Standard deviation of the stationary error process.
    pub noise_scale: f64,
}

impl Default for CorrStudyConfig {
    fn default() -> Self {
        CorrStudyConfig {
            n: 3650,
            max_freq: 1825,
            nsim: 20,
            alpha: 0.01,
            nu: 1,
            seed: 1,
            noise_scale: 2.7,
        }
    }
}

/// One cell of the correlated-error study: a signal shape crossed with a
/// moving-average error parameter.
#[derive(Debug, Clone, Serialize)]
pub struct CorrCell {
    pub signal: String,
    /// Moving-average weight of the error process.
    pub gamma: f64,
    /// Lag-one autocorrelation γ/(1+γ²) implied by `gamma`.
    pub error_corr: f64,
    /// Selected covariate count per replication, intercept not counted.
    pub counts: Vec<usize>,
    pub mean: f64,
    pub min: usize,
    pub max: usize,
}

/// Covariate selection on a full trigonometric basis under
/// moving-average errors.
///
/// The design holds sine and cosine columns up to `max_freq` plus an
/// intercept, built once and shared. Errors follow
/// `ε_t = noise_scale·(Z_t + γZ_{t−1})/√(1+γ²)` for γ in
/// {0, 2−√3, 1}, giving lag-one correlations 0, 0.25, and 0.5. Three
/// signals are studied: none, a single sine of amplitude 20 at the 20th
/// sine frequency, and a five-term low-frequency sum. Each cell reports
/// the selected-count distribution over `nsim` replications.
pub fn correlated_error_study(cfg: &CorrStudyConfig) -> Result<Vec<CorrCell>> {
    if cfg.nsim == 0 {
        return Err(Error::Domain("nsim must be at least 1".into()));
    }
    if !(cfg.alpha.is_finite() && 0.0 < cfg.alpha && cfg.alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {} outside (0, 1)", cfg.alpha)));
    }
    if cfg.max_freq < 40 {
        return Err(Error::Domain(
            "the study's signals need max_freq of at least 40".into(),
        ));
    }
    if !(cfg.noise_scale.is_finite() && cfg.noise_scale > 0.0) {
        return Err(Error::Domain(format!(
            "noise scale must be positive, got {}",
            cfg.noise_scale
        )));
    }
    let basis = trig_basis(cfg.n, cfg.max_freq, true)?;
    let allowed: Vec<usize> = (0..basis.q()).collect();
    let sel_cfg = SelectionConfig {
        alpha: cfg.alpha,
        nu: cfg.nu,
        ..SelectionConfig::default()
    };

    // Signals in terms of 1-based design columns (the intercept is 0).
    let sine_terms: [(usize, f64); 1] = [(39, 20.0)];
    let smooth_terms: [(usize, f64); 5] =
        [(40, 1.6), (39, 0.8), (77, 0.5), (16, 0.26), (79, 0.24)];
    let make_signal = |terms: &[(usize, f64)]| -> Vec<f64> {
        let mut s = vec![0.0f64; cfg.n];
        for &(c, a) in terms {
            let col = basis.column(c);
            for (si, &v) in s.iter_mut().zip(col) {
                *si += a * v;
            }
        }
        s
    };
    let signals: [(&str, Vec<f64>); 3] = [
        ("none", vec![0.0; cfg.n]),
        ("sine", make_signal(&sine_terms)),
        ("smooth", make_signal(&smooth_terms)),
    ];
    let gammas = [0.0f64, 2.0 - 3.0f64.sqrt(), 1.0];

    // One error draw per (gamma, replication), shared by all signals.
    let runs: Result<Vec<Vec<usize>>> = (0..gammas.len() * cfg.nsim)
        .into_par_iter()
        .map(|run| {
            let g_idx = run / cfg.nsim;
            let rep = run % cfg.nsim;
            let gamma = gammas[g_idx];
            let mut rng = rep_rng(cfg.seed, (g_idx * cfg.nsim + rep) as u64 + 1);
            let z = gaussian_vec(&mut rng, cfg.n + 1);
            let scale = cfg.noise_scale / (1.0 + gamma * gamma).sqrt();
            let eps: Vec<f64> = (0..cfg.n)
                .map(|t| scale * (z[t + 1] + gamma * z[t]))
                .collect();
            signals
                .iter()
                .map(|(_, signal)| {
                    let y: Vec<f64> = signal.iter().zip(&eps).map(|(s, e)| s + e).collect();
                    let result = stepwise_core(&basis, &y, &sel_cfg, &allowed)?;
                    Ok(result.selected().into_iter().filter(|&j| j != 0).count())
                })
                .collect()
        })
        .collect();
    let runs = runs?;

    let mut cells = Vec::with_capacity(9);
    for (s_idx, (name, _)) in signals.iter().enumerate() {
        for (g_idx, &gamma) in gammas.iter().enumerate() {
            let counts: Vec<usize> = (0..cfg.nsim)
                .map(|rep| runs[g_idx * cfg.nsim + rep][s_idx])
                .collect();
            let mean = counts.iter().sum::<usize>() as f64 / cfg.nsim as f64;
            cells.push(CorrCell {
                signal: name.to_string(),
                gamma,
                error_corr: gamma / (1.0 + gamma * gamma),
                min: *counts.iter().min().unwrap(),
                max: *counts.iter().max().unwrap(),
                counts,
                mean,
            });
        }
    }
    Ok(cells)
}

/// Monte-Carlo estimate of the defining step P-value: the probability
/// that the ν-th best of `q_pool − k` fresh Gaussian covariates, added to
/// the given model, reaches an rss at most `rss_i`.
///
/// Simulates the definition directly on the model's actual response and
/// selection state, so it is an independent oracle for the closed form.
pub fn mc_pvalue_oracle(
    model: &ActiveModel,
    rss_i: f64,
    q_pool: usize,
    nu: usize,
    nsim: usize,
    seed: u64,
) -> Result<Prob> {
    let p = mc_pvalue_oracle_batch(model, &[rss_i], q_pool, nu, nsim, seed)?[0];
    Prob::new(p)
}

/// [`mc_pvalue_oracle`] evaluated at many rss thresholds over one shared
/// simulation stream.
pub fn mc_pvalue_oracle_batch(
    model: &ActiveModel,
    rss_list: &[f64],
    q_pool: usize,
    nu: usize,
    nsim: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let k = model.k();
    let n = model.residual().len();
    let rss0 = model.rss();
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
    if nsim == 0 {
        return Err(Error::Domain("nsim must be at least 1".into()));
    }
    if rss_list.is_empty() {
        return Err(Error::Data("no rss thresholds given".into()));
    }
    for &r in rss_list {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Domain(format!("rss threshold {r}")));
        }
    }
    let names: Vec<String> = (0..m).map(|j| format!("z{j}")).collect();
    let indices: Vec<usize> = (0..m).collect();
    let counts: Vec<Vec<usize>> = (0..nsim)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(seed, rep as u64 + 1);
            let cols: Vec<Vec<f64>> = (0..m).map(|_| gaussian_vec(&mut rng, n)).collect();
            let zmat = CovariateMatrix::new(cols, names.clone(), false)
                .expect("gaussian candidate matrix");
            let mut draws: Vec<f64> = model
                .candidate_rss(&zmat, &indices)
                .into_iter()
                .map(|c| c.rss)
                .collect();
            draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let nth = draws[nu - 1];
            rss_list
                .iter()
                .map(|&r| usize::from(nth <= r.min(rss0)))
                .collect()
        })
        .collect();
    let mut totals = vec![0usize; rss_list.len()];
    for row in counts {
        for (t, c) in totals.iter_mut().zip(row) {
            *t += c;
        }
    }
    Ok(totals.iter().map(|&t| t as f64 / nsim as f64).collect())
}

/// Empirical coverage of the equivalence region over simulated linear
/// models: the fraction of replications whose true coefficient vector
/// lies inside the region at level `alpha`.
pub fn equivalence_coverage(
    n: usize,
    q: usize,
    alpha: f64,
    nsim: usize,
    seed: u64,
) -> Result<f64> {
    if nsim == 0 {
        return Err(Error::Domain("nsim must be at least 1".into()));
    }
    if q == 0 || q >= n {
        return Err(Error::Domain(format!("need 0 < q < n, got q={q}, n={n}")));
    }
    let level = Prob::new(alpha)?;
    let names = column_names(q);
    let hits: Result<Vec<bool>> = (0..nsim)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(seed, rep as u64 + 1);
            let cols: Vec<Vec<f64>> = (0..q).map(|_| gaussian_vec(&mut rng, n)).collect();
            let beta: Vec<f64> = gaussian_vec(&mut rng, q);
            let y: Vec<f64> = (0..n)
                .map(|t| {
                    let mean: f64 = cols.iter().zip(&beta).map(|(c, b)| b * c[t]).sum();
                    mean + rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            let d = Dataset::from_columns(cols, names.clone(), y, false)?;
            Ok(equiv_contains(&d, &beta, level)?.inside)
        })
        .collect();
    let hits = hits?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / nsim as f64)
}
