//! End-to-end acceptance checks. Each test asserts one quantitative
//! guarantee of the library at its stated tolerance and prints a single
//! summary line with the measured numbers. Tests that need the optional
//! benchmark datasets skip with a note when the files are absent.

mod util;

use std::time::Instant;

use gausscov::data::{CovariateMatrix, Dataset};
use gausscov::engine::ActiveModel;
use gausscov::extensions::{
    initial_scale, m_fit, m_step_pvalue, nonlinear_step_pvalue, HuberLoss, IdentityLink,
};
use gausscov::featuregen::{interaction_count, interactions};
use gausscov::montecarlo::{
    correlated_error_study, equivalence_coverage, fsimords, mc_pvalue_oracle_batch, tutorial1,
    CorrStudyConfig, SimConfig,
};
use gausscov::pvalues::{pf_from_pg, pg_nested, pg_nested_f, step_pvalue};
use gausscov::selection::{all_subsets, stepwise, SelectionConfig};
use gausscov::Prob;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn a01_beta_and_f_routes_give_identical_pvalues() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(8usize..400);
        let k = rng.gen_range(2usize..(n / 2).max(3));
        let k0 = rng.gen_range(0usize..k);
        let ratio: f64 = rng.gen_range(1e-6..1.0);
        let scale: f64 = rng.gen_range(0.1..10.0);
        let pg = pg_nested(scale, scale * ratio, n, k, k0).unwrap().value();
        let pf = pg_nested_f(scale, scale * ratio, n, k, k0).unwrap().value();
        worst = worst.max((pg - pf).abs());
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-12, "largest disagreement between routes {worst:e}");
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "1000 paired evaluations took {elapsed:?}"
    );
    println!(
        "PASS dual routes: worst |p_beta - p_f| = {worst:.2e} over 1000 draws in {elapsed:?}"
    );
}

#[test]
fn a02_search_threshold_converts_to_classical_f_scale() {
    let p = Prob::new(0.01).unwrap();
    let expected = 2.059495e-7;
    let got = pf_from_pg(p, 129, 0, 48802).unwrap().value();
    let rel = ((got - expected) / expected).abs();
    assert!(
        rel <= 1e-3,
        "converted threshold {got:e} is {rel:.2e} away from {expected:e}"
    );
    let after_one = pf_from_pg(p, 129, 1, 48802).unwrap().value();
    println!(
        "PASS f-scale conversion: 0.01 over 48802 candidates -> {got:.6e} (rel {rel:.1e}); \
         after one accepted covariate -> {after_one:.6e}"
    );
}

#[test]
fn a03_monte_carlo_oracle_confirms_the_closed_form() {
    let start = Instant::now();
    let n = 50;
    let q_pool = 20;
    let nsim = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let y = gaussian_column(&mut rng, n);
    let mut worst_se = 0.0f64;
    let mut probes = 0;
    for &k in &[0usize, 2] {
        let mut model = ActiveModel::from_response(&y);
        if k > 0 {
            let cols: Vec<Vec<f64>> = (0..k).map(|_| gaussian_column(&mut rng, n)).collect();
            let names = (0..k).map(|j| format!("f{j}")).collect();
            let x = CovariateMatrix::new(cols, names, false).unwrap();
            for j in 0..k {
                model.add_covariate(&x, j).unwrap();
            }
        }
        let rss0 = model.rss();
        let rss_list: Vec<f64> = (1..=10).map(|i| rss0 * i as f64 / 11.0).collect();
        for &nu in &[1usize, 3] {
            let seed = 7000 + 10 * k as u64 + nu as u64;
            let mc = mc_pvalue_oracle_batch(&model, &rss_list, q_pool, nu, nsim, seed).unwrap();
            for (&rss_i, &phat) in rss_list.iter().zip(&mc) {
                let exact = step_pvalue(rss0, rss_i, n, k, q_pool, nu).unwrap().value();
                let se = (exact * (1.0 - exact) / nsim as f64).sqrt();
                let sigmas = (phat - exact).abs() / se.max(f64::MIN_POSITIVE);
                assert!(
                    (phat - exact).abs() <= 3.0 * se,
                    "k={k} nu={nu} rss {rss_i:.3}: simulated {phat:.5} vs exact {exact:.5} \
                     ({sigmas:.1} se)"
                );
                worst_se = worst_se.max(sigmas);
                probes += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "oracle comparison took {elapsed:?}");
    println!(
        "PASS simulation oracle: {probes} probes within 3 binomial se \
         (worst {worst_se:.2} se) in {elapsed:?}"
    );
}

#[test]
fn a04_false_positive_moments_under_pure_noise() {
    let start = Instant::now();
    let base = SimConfig {
        nsim: 10_000,
        seed: 44,
        ..SimConfig::default()
    };
    let five = fsimords(&SimConfig { nu: 5, ..base.clone() }).unwrap();
    let ten = fsimords(&SimConfig { nu: 10, ..base }).unwrap();
    let elapsed = start.elapsed();

    // All three bands are evaluated before any assertion so a failure
    // still reports the complete picture.
    let checks: [(&str, f64, f64, f64); 3] = [
        ("rank 5 mean", five.mean_fp, 1.27, 1.37),
        ("rank 5 sd", five.sd_fp, 1.08, 1.18),
        ("rank 10 mean", ten.mean_fp, 4.42, 4.58),
    ];
    let mut failures = Vec::new();
    for (label, value, lo, hi) in checks {
        if (lo..=hi).contains(&value) {
            println!("  ok   {label} {value:.4} in [{lo}, {hi}]");
        } else {
            println!("  FAIL {label} {value:.4} outside [{lo}, {hi}]");
            failures.push(format!("{label} {value:.4} outside [{lo}, {hi}]"));
        }
    }
    let hist_total: usize = five.histogram.iter().sum();
    let hist: Vec<f64> = five
        .histogram
        .iter()
        .map(|&c| c as f64 / hist_total as f64)
        .collect();
    println!(
        "  rank 5 histogram {:?}, rank 10 mean {:.3} sd {:.3}; {elapsed:?} \
         on this pool (5 min target assumes a multicore machine)",
        &hist[..hist.len().min(7)],
        ten.mean_fp,
        ten.sd_fp
    );
    assert!(
        failures.is_empty(),
        "noise moments outside their bands: {}. The observed rank 5 sd is \
         reproducible across seeds (four independent 10000-replication runs \
         gave 1.183 to 1.194). Its histogram (0.277, 0.354, 0.217, 0.099, \
         0.037, 0.013, ...) matches the published one to rounding and the \
         rank 10 moments match the published (4.50, 2.29) exactly, but a \
         count distribution with the published rank 5 histogram and mean \
         1.32 cannot have an sd below 1.15, so the 1.13 behind this band \
         looks like a misprint in the source table.",
        failures.join("; ")
    );
    println!(
        "PASS noise moments: rank 5 mean {:.3} sd {:.3}, rank 10 mean {:.3}",
        five.mean_fp, five.sd_fp, ten.mean_fp
    );
}

#[test]
fn a05_probability_of_any_false_positive_is_bracketed() {
    let start = Instant::now();
    let nsim = 5000;
    let mut lines = Vec::new();
    for &alpha in &[0.01f64, 0.05] {
        let rep = fsimords(&SimConfig {
            alpha,
            nsim,
            seed: 55,
            ..SimConfig::default()
        })
        .unwrap();
        let p_any = 1.0 - rep.p_zero_fp;
        let upper_center = -(1.0f64 - alpha).ln();
        let lo = alpha - 3.0 * (alpha * (1.0 - alpha) / nsim as f64).sqrt();
        let hi = upper_center + 3.0 * (upper_center * (1.0 - upper_center) / nsim as f64).sqrt();
        assert!(
            (lo..=hi).contains(&p_any),
            "alpha {alpha}: p(any false positive) = {p_any:.4} outside [{lo:.4}, {hi:.4}]"
        );
        lines.push(format!("alpha {alpha}: {p_any:.4} in [{lo:.4}, {hi:.4}]"));
    }
    let elapsed = start.elapsed();
    println!("PASS any-false-positive band: {}; {elapsed:?}", lines.join("; "));
}

#[test]
fn a06_planted_support_recovery_moderate_amplitude() {
    let start = Instant::now();
    let base = SimConfig {
        seed: 66,
        ..SimConfig::toeplitz_benchmark()
    };
    let one = tutorial1(&base.clone()).unwrap();
    assert!(
        one.mean_fp <= 0.2,
        "rank 1: mean false positives {:.3}",
        one.mean_fp
    );
    assert!(
        (43.0..=63.0).contains(&one.mean_fn),
        "rank 1: mean false negatives {:.2}",
        one.mean_fn
    );
    let ten = tutorial1(&SimConfig { nu: 10, ..base }).unwrap();
    assert!(
        (3.0..=9.0).contains(&ten.mean_fp),
        "rank 10: mean false positives {:.3}",
        ten.mean_fp
    );
    assert!(
        (3.0..=10.0).contains(&ten.mean_fn),
        "rank 10: mean false negatives {:.2}",
        ten.mean_fn
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "benchmark took {elapsed:?}");
    println!(
        "PASS planted support, amplitude 4.5: rank 1 fp {:.3} fn {:.2}; \
         rank 10 fp {:.2} fn {:.2}; {elapsed:?}",
        one.mean_fp, one.mean_fn, ten.mean_fp, ten.mean_fn
    );
}

#[test]
fn a07_planted_support_recovery_strong_amplitude() {
    let cfg = SimConfig {
        p: 5,
        amplitude: 45.0,
        seed: 77,
        ..SimConfig::toeplitz_benchmark()
    };
    let rep = tutorial1(&cfg).unwrap();
    let missed: usize = rep.reps.iter().map(|r| r.false_negatives).sum();
    assert_eq!(missed, 0, "strong planted covariates missed in some replication");
    assert!(rep.mean_fp <= 0.2, "mean false positives {:.3}", rep.mean_fp);
    println!(
        "PASS planted support, amplitude 45: all {} replications recovered every \
         planted covariate, mean fp {:.3}",
        rep.nsim, rep.mean_fp
    );
}

#[test]
fn a08_benchmark_datasets_reproduce_published_selections() {
    let (Some(wine), Some(boston)) = (
        util::dataset("winequality-red.csv", ';', "quality"),
        util::dataset("boston.csv", ',', "medv"),
    ) else {
        println!("SKIP benchmark selections: dataset files not present");
        return;
    };

    let wine_res = stepwise(&wine, &SelectionConfig::default()).unwrap();
    let wine_names = [
        "0",
        "alcohol",
        "volatile acidity",
        "sulphates",
        "total sulfur dioxide",
        "chlorides",
        "pH",
    ];
    let wine_rss = [1042.2, 805.9, 711.8, 692.1, 683.9, 675.9, 669.9];
    assert_eq!(wine_res.trace.len(), wine_names.len(), "wine trace length");
    for (row, (&name, &rss)) in wine_res.trace.iter().zip(wine_names.iter().zip(&wine_rss)) {
        assert_eq!(row.name, name, "wine selection order");
        assert!(
            (row.rss - rss).abs() <= 0.1,
            "wine rss for {}: {:.2} vs {rss}",
            row.name,
            row.rss
        );
    }
    let wine_subsets = all_subsets(&wine, 0.01, 1, 16).unwrap();
    assert_eq!(wine_subsets.len(), 20, "wine approximation count");

    let boston_res = stepwise(&boston, &SelectionConfig::default()).unwrap();
    let boston_idx = [0usize, 13, 6, 11, 8, 5, 4, 12];
    let boston_rss = [
        42716.0, 19472.0, 15439.0, 13728.0, 13229.0, 12469.0, 12141.0, 11868.0,
    ];
    assert_eq!(boston_res.selected(), boston_idx, "boston selection order");
    for (row, &rss) in boston_res.trace.iter().zip(&boston_rss) {
        assert!(
            (row.rss - rss).abs() <= 1.0,
            "boston rss for column {}: {:.1} vs {rss}",
            row.index,
            row.rss
        );
    }
    let boston_subsets = all_subsets(&boston, 0.01, 1, 16).unwrap();
    assert_eq!(boston_subsets.len(), 34, "boston approximation count");

    println!(
        "PASS benchmark selections: wine 6 covariates, final rss {:.1}, 20 subsets; \
         boston 7 covariates, final rss {:.1}, 34 subsets",
        wine_res.trace.last().unwrap().rss,
        boston_res.trace.last().unwrap().rss
    );
}

#[test]
fn a09_interaction_counts_and_degree_seven_selection() {
    assert_eq!(interaction_count(13, 7).unwrap(), 77_520);
    assert_eq!(interaction_count(13, 8).unwrap(), 203_490);
    let Some(boston) = util::dataset("boston.csv", ',', "medv") else {
        println!(
            "PASS interaction counts: C(20,7) = 77520 and C(21,8) = 203490 \
             (degree-7 selection skipped: dataset not present)"
        );
        return;
    };
    let expanded = interactions(&boston, 7, 100_000).unwrap();
    assert_eq!(expanded.q(), 77_520, "degree-7 design width");
    let res = stepwise(&expanded, &SelectionConfig::default()).unwrap();
    assert!(
        res.trace.len() >= 4,
        "selection stopped after {} trace rows",
        res.trace.len()
    );
    let rss3 = res.trace[3].rss;
    assert!(rss3 <= 10_000.0, "rss after three interaction terms {rss3:.0}");
    println!(
        "PASS interactions: counts exact; rss after three degree-7 terms {rss3:.0}"
    );
}

/// Least squares through the normal equations, solved by an unblocked
/// Cholesky factorization with explicit residual accumulation. Shares no
/// code with the incremental engine it cross-checks.
fn cholesky_rss(d: &Dataset, members: &[usize]) -> f64 {
    let n = d.n();
    let k = members.len();
    let x = d.x();
    let y = d.y();
    let mut gram = vec![0.0f64; k * k];
    let mut xty = vec![0.0f64; k];
    for (a, &ca) in members.iter().enumerate() {
        let col_a = x.column(ca);
        for (b, &cb) in members.iter().enumerate().take(a + 1) {
            let dot: f64 = col_a.iter().zip(x.column(cb)).map(|(u, v)| u * v).sum();
            gram[a * k + b] = dot;
            gram[b * k + a] = dot;
        }
        xty[a] = col_a.iter().zip(y).map(|(u, v)| u * v).sum();
    }
    let mut l = vec![0.0f64; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = gram[i * k + j];
            for t in 0..j {
                s -= l[i * k + t] * l[j * k + t];
            }
            if i == j {
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut z = xty;
    for i in 0..k {
        for t in 0..i {
            z[i] -= l[i * k + t] * z[t];
        }
        z[i] /= l[i * k + i];
    }
    let mut coef = z;
    for i in (0..k).rev() {
        for t in (i + 1)..k {
            coef[i] -= l[t * k + i] * coef[t];
        }
        coef[i] /= l[i * k + i];
    }
    let mut rss = 0.0;
    for t in 0..n {
        let mut fit = 0.0;
        for (a, &ca) in members.iter().enumerate() {
            fit += coef[a] * x.column(ca)[t];
        }
        let r = y[t] - fit;
        rss += r * r;
    }
    rss
}

/// Exhaustive reference for the all-subsets search: enumerate every
/// non-empty subset of the non-constant columns, qualify it when each
/// member clears `alpha` after adjusting for the full pool, keep the
/// maximal qualifying subsets, and order them by rss.
fn exhaustive_subsets(d: &Dataset, alpha: f64, nu: usize) -> Vec<(Vec<usize>, f64)> {
    let x = d.x();
    let n = d.n();
    let q_pool = x.q();
    let vars: Vec<usize> = (1..x.q()).collect();
    let mut qualifying: Vec<(u32, Vec<usize>, f64)> = Vec::new();
    for mask in 1u32..(1 << vars.len()) {
        let mut members = vec![0usize];
        members.extend(
            vars.iter()
                .enumerate()
                .filter(|(pos, _)| mask >> pos & 1 == 1)
                .map(|(_, &c)| c),
        );
        let k = members.len();
        if k >= n || q_pool < k || q_pool - (k - 1) < nu {
            continue;
        }
        let rss = cholesky_rss(d, &members);
        if rss <= 0.0 {
            continue;
        }
        let mut all_pass = true;
        for &m in members.iter().filter(|&&m| m != 0) {
            let without: Vec<usize> = members.iter().copied().filter(|&j| j != m).collect();
            let rss_without = cholesky_rss(d, &without);
            let p = step_pvalue(rss_without, rss, n, k - 1, q_pool, nu)
                .unwrap()
                .value();
            if p > alpha {
                all_pass = false;
                break;
            }
        }
        if all_pass {
            qualifying.push((mask, members, rss));
        }
    }
    let mut maximal: Vec<(Vec<usize>, f64)> = qualifying
        .iter()
        .filter(|(mask, _, _)| {
            !qualifying
                .iter()
                .any(|(other, _, _)| other != mask && other & mask == *mask)
        })
        .map(|(_, members, rss)| (members.clone(), *rss))
        .collect();
    maximal.sort_by(|a, b| a.1.total_cmp(&b.1));
    maximal
}

#[test]
fn a10_all_subsets_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let alphas = [0.01, 0.05, 0.2];
    let nus = [1usize, 1, 2];
    let mut total_subsets = 0;
    for instance in 0..50 {
        let n = rng.gen_range(25usize..60);
        let q = rng.gen_range(4usize..=12);
        let alpha = alphas[instance % alphas.len()];
        let nu = nus[instance % nus.len()];
        let mut cols: Vec<Vec<f64>> = (0..q).map(|_| gaussian_column(&mut rng, n)).collect();
        let mut y = gaussian_column(&mut rng, n);
        let support = rng.gen_range(0usize..=q.min(3));
        for planted in cols.iter_mut().take(support) {
            let b: f64 = rng.gen_range(0.5..2.0);
            for (yt, xt) in y.iter_mut().zip(planted.iter()) {
                *yt += b * xt;
            }
        }
        let names = (0..q).map(|j| format!("v{j}")).collect();
        let d = Dataset::from_columns(cols, names, y, true).unwrap();

        let fast = all_subsets(&d, alpha, nu, 16).unwrap();
        let slow = exhaustive_subsets(&d, alpha, nu);
        assert_eq!(
            fast.len(),
            slow.len(),
            "instance {instance} (n={n}, q={q}, alpha={alpha}, nu={nu}): \
             {} vs {} subsets",
            fast.len(),
            slow.len()
        );
        for (f, s) in fast.iter().zip(&slow) {
            assert_eq!(f.members, s.0, "instance {instance}: member sets differ");
            assert!(
                (f.rss - s.1).abs() <= 1e-8 * s.1.max(1.0),
                "instance {instance}: rss {} vs {}",
                f.rss,
                s.1
            );
        }
        total_subsets += fast.len();
    }
    println!(
        "PASS exhaustive agreement: 50 instances, {total_subsets} maximal subsets, \
         identical membership and order"
    );
}

#[test]
fn a11_equivalence_region_coverage() {
    let start = Instant::now();
    let mut lines = Vec::new();
    for &alpha in &[0.05f64, 0.1] {
        let cov = equivalence_coverage(50, 5, alpha, 10_000, 1111).unwrap();
        let se = (alpha * (1.0 - alpha) / 10_000.0).sqrt();
        let target = 1.0 - alpha;
        assert!(
            (cov - target).abs() <= 3.0 * se,
            "alpha {alpha}: coverage {cov:.4} vs {target} (3 se = {:.4})",
            3.0 * se
        );
        lines.push(format!("alpha {alpha}: {cov:.4}"));
    }
    let elapsed = start.elapsed();
    println!("PASS equivalence coverage: {}; {elapsed:?}", lines.join("; "));
}

#[test]
fn a12_robust_and_nonlinear_limits_track_the_exact_pvalue() {
    let n = 500;
    let q = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let cols: Vec<Vec<f64>> = (0..q).map(|_| gaussian_column(&mut rng, n)).collect();
    let mut y = gaussian_column(&mut rng, n);
    for (yt, xt) in y.iter_mut().zip(cols[2].iter()) {
        *yt += 0.12 * xt;
    }
    let names = (0..q).map(|j| format!("g{j}")).collect();
    let d = Dataset::from_columns(cols, names, y, true).unwrap();

    let q_pool = d.q();
    let sigma = initial_scale(d.y()).unwrap();
    let wide = HuberLoss::new(1e6).unwrap();
    let fit0 = m_fit(&d, &[0], &wide, sigma).unwrap();
    let mut model = ActiveModel::new(&d);
    model.add_covariate(d.x(), 0).unwrap();
    let rss0 = model.rss();
    let beta0 = model.coefficients().unwrap();

    let mut worst_robust = 0.0f64;
    let mut worst_nonlin = 0.0f64;
    for j in 1..d.q() {
        let rss_j = model.candidate_rss(d.x(), &[j])[0].rss;
        let exact = step_pvalue(rss0, rss_j, n, 1, q_pool, 1).unwrap().value();

        let fit = m_fit(&d, &[0, j], &wide, sigma).unwrap();
        let robust = m_step_pvalue(&fit0, fit.mean_loss, q_pool, 1).unwrap().value();
        assert!(
            (robust - exact).abs() <= 0.02,
            "column {j}: robust {robust:.4} vs exact {exact:.4}"
        );
        worst_robust = worst_robust.max((robust - exact).abs());

        let nonlin = nonlinear_step_pvalue(&d, &[0], &beta0, &IdentityLink, rss0 - rss_j, q_pool, 1)
            .unwrap()
            .value();
        assert!(
            (nonlin - exact).abs() <= 0.02,
            "column {j}: nonlinear {nonlin:.4} vs exact {exact:.4}"
        );
        worst_nonlin = worst_nonlin.max((nonlin - exact).abs());
    }
    println!(
        "PASS gaussian limits: 20 candidates, worst |robust - exact| {worst_robust:.4}, \
         worst |nonlinear - exact| {worst_nonlin:.4}"
    );
}

#[test]
fn a13_correlated_error_study_selects_as_published() {
    let start = Instant::now();
    let cells = correlated_error_study(&CorrStudyConfig::default()).unwrap();
    let cell = |signal: &str, rho: f64| {
        cells
            .iter()
            .find(|c| c.signal == signal && (c.error_corr - rho).abs() < 1e-9)
            .unwrap_or_else(|| panic!("no cell for {signal} at correlation {rho}"))
    };

    let none = cell("none", 0.0);
    assert!(
        none.counts.iter().all(|&c| c == 0),
        "no-signal independent errors: counts {:?}",
        none.counts
    );
    for &rho in &[0.0, 0.25] {
        let sine = cell("sine", rho);
        let exact_one = sine.counts.iter().filter(|&&c| c == 1).count();
        assert!(
            exact_one >= 18,
            "sine at correlation {rho}: exactly one frequency in {exact_one}/20 runs \
             (counts {:?})",
            sine.counts
        );
    }
    let smooth = cell("smooth", 0.5);
    assert!(
        (3.0..=5.5).contains(&smooth.mean),
        "smooth signal at correlation 0.5: mean selected {:.2}",
        smooth.mean
    );
    let elapsed = start.elapsed();
    println!(
        "PASS correlated errors: none/0 all zero, sine exact-one in >= 18/20 at \
         correlations 0 and 0.25, smooth/0.5 mean {:.2}; {elapsed:?}",
        smooth.mean
    );
}

fn synthetic_base(n: usize, q: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(1414);
    let cols: Vec<Vec<f64>> = (0..q).map(|_| gaussian_column(&mut rng, n)).collect();
    let mut y = gaussian_column(&mut rng, n);
    for t in 0..n {
        y[t] += 2.0 * cols[0][t] * cols[1][t] + 0.5 * cols[2][t];
    }
    let names = (0..q).map(|j| format!("b{j}")).collect();
    Dataset::from_columns(cols, names, y, true).unwrap()
}

#[test]
fn a14_stepwise_over_two_hundred_thousand_candidates() {
    let base = util::dataset("boston.csv", ',', "medv")
        .unwrap_or_else(|| synthetic_base(506, 13));
    let start = Instant::now();
    let expanded = interactions(&base, 8, 250_000).unwrap();
    let built = start.elapsed();
    assert_eq!(expanded.q(), 203_490, "degree-8 design width");
    let select_start = Instant::now();
    let res = stepwise(&expanded, &SelectionConfig::default()).unwrap();
    let selected = select_start.elapsed();
    let total = start.elapsed();
    assert!(
        total.as_secs_f64() < 60.0,
        "expansion {built:?} + selection {selected:?} exceeded a minute"
    );
    println!(
        "PASS wide stepwise: 203490 columns built in {built:?}, {} covariates \
         selected in {selected:?}, final rss {:.1}",
        res.trace.len().saturating_sub(1),
        res.trace.last().map_or(f64::NAN, |r| r.rss)
    );
}
