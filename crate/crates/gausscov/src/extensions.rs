//! Selection beyond least squares: Huber M-regression, nonlinear least
//! squares, and logistic regression scored by the Kullback-Leibler
//! discrepancy. Each variant keeps the selection logic of the linear case
//! and replaces the exact Beta tail of the rss drop with an asymptotic
//! chi-square tail of the objective drop, raised to the pool-size power.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::selection::TerminationReason;
use crate::specfun::{chisq_sf, normal_cdf, Prob};
use rayon::prelude::*;
use serde::Serialize;

/// Quadratic-then-linear convex loss with tuning constant `c`.
///
/// `rho(u) = u²/2` for `|u| <= c` and `c|u| − c²/2` beyond, so its
/// derivative is `u` clipped to `[−c, c]`.
#[derive(Debug, Clone, Copy)]
pub struct HuberLoss {
    c: f64,
}

impl Default for HuberLoss {
    fn default() -> Self {
        HuberLoss { c: 1.0 }
    }
}

impl HuberLoss {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("Huber constant must be positive, got {c}")));
        }
        Ok(HuberLoss { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn rho(&self, u: f64) -> f64 {
        let a = u.abs();
        if a <= self.c {
            0.5 * u * u
        } else {
            self.c * a - 0.5 * self.c * self.c
        }
    }

    /// First derivative: `u` clipped to `[−c, c]`.
    pub fn psi(&self, u: f64) -> f64 {
        u.clamp(-self.c, self.c)
    }

    /// Second derivative: the indicator of the quadratic zone.
    pub fn psi_prime(&self, u: f64) -> f64 {
        if u.abs() <= self.c {
            1.0
        } else {
            0.0
        }
    }

    /// `E psi(Z)²` for standard normal `Z`, the consistency factor of the
    /// scale update: `2Φ(c) − 1 − 2cφ(c) + 2c²(1 − Φ(c))`.
    pub fn expected_psi_sq(&self) -> f64 {
        let c = self.c;
        let phi_c = (-0.5 * c * c).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let cap_phi = normal_cdf(c);
        2.0 * cap_phi - 1.0 - 2.0 * c * phi_c + 2.0 * c * c * (1.0 - cap_phi)
    }
}

/// Converged M-estimation state for one subset at a fixed scale.
#[derive(Debug, Clone)]
pub struct RobustFit {
    /// Columns of the fit, in order.
    pub subset: Vec<usize>,
    /// Coefficients matching `subset`.
    pub coefficients: Vec<f64>,
    /// The scale the residuals were standardized by.
    pub scale: f64,
    /// Mean loss `(1/n) Σ rho(r/σ)`, the selection objective.
    pub mean_loss: f64,
    /// Mean squared loss derivative `(1/n) Σ psi(r/σ)²`.
    pub mean_psi_sq: f64,
    /// Summed second derivative `Σ psi'(r/σ)`.
    pub sum_psi_prime: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Robust scale from the response alone: median absolute deviation about
/// the median, times the consistency factor 1.4826.
pub fn initial_scale(y: &[f64]) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::Data("scale needs at least 2 observations".into()));
    }
    let med = median(y);
    let deviations: Vec<f64> = y.iter().map(|v| (v - med).abs()).collect();
    let mad = median(&deviations);
    if mad == 0.0 {
        return Err(Error::Domain(
            "median absolute deviation is zero; no scale".into(),
        ));
    }
    Ok(mad * 1.4826)
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Minimizes the mean Huber loss of the residuals over the coefficients
/// of the subset columns, at fixed scale `sigma`.
///
/// Iteratively reweighted least squares with weights `psi(u)/u`; the
/// objective decreases monotonically and iteration stops when the
/// normalized gradient `Σ psi(r_i/σ) x_i / ‖x‖` has norm at most 1e-8·n.
/// An empty subset is allowed and describes the fixed response itself.
pub fn m_fit(d: &Dataset, subset: &[usize], loss: &HuberLoss, sigma: f64) -> Result<RobustFit> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {sigma}")));
    }
    let n = d.n();
    let m = subset.len();
    let x = d.x();
    for &j in subset {
        if j >= x.q() {
            return Err(Error::Data(format!("column index {j} out of range")));
        }
    }
    // Unit-normalized columns keep the linear algebra well conditioned.
    let norms: Vec<f64> = subset
        .iter()
        .map(|&j| {
            let nrm = x.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 {
                return Err(Error::Collinear {
                    index: j,
                    name: x.name(j).to_string(),
                });
            }
            Ok(nrm)
        })
        .collect::<Result<_>>()?;
    let cols: Vec<Vec<f64>> = subset
        .iter()
        .zip(&norms)
        .map(|(&j, &nrm)| x.column(j).iter().map(|v| v / nrm).collect())
        .collect();

    let mut beta = vec![0.0; m];
    let mut residuals = d.y().to_vec();
    let objective = |r: &[f64]| r.iter().map(|&ri| loss.rho(ri / sigma)).sum::<f64>() / n as f64;
    let mut best = objective(&residuals);
    let mut iterations = 0;

    if m > 0 {
        let tol = 1e-8 * n as f64;
        loop {
            // Gradient of the summed loss in the normalized coordinates.
            let grad: Vec<f64> = cols
                .iter()
                .map(|col| {
                    residuals
                        .iter()
                        .zip(col)
                        .map(|(&ri, &ci)| loss.psi(ri / sigma) * ci)
                        .sum::<f64>()
                })
                .collect();
            let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if grad_norm <= tol {
                break;
            }
            if iterations >= 200 {
                return Err(Error::NonConvergence {
                    routine: "m_fit",
                    detail: format!("gradient norm {grad_norm:e} after {iterations} iterations"),
                });
            }
            iterations += 1;

            // Weighted normal equations with psi(u)/u weights.
            let weights: Vec<f64> = residuals
                .iter()
                .map(|&ri| {
                    let u = ri / sigma;
                    if u == 0.0 {
                        1.0
                    } else {
                        loss.psi(u) / u
                    }
                })
                .collect();
            let mut gram = vec![vec![0.0; m]; m];
            let mut rhs = vec![0.0; m];
            for a in 0..m {
                for b in a..m {
                    let mut s = 0.0;
                    for t in 0..n {
                        s += weights[t] * cols[a][t] * cols[b][t];
                    }
                    gram[a][b] = s;
                    gram[b][a] = s;
                }
                let mut s = 0.0;
                for t in 0..n {
                    s += weights[t] * cols[a][t] * d.y()[t];
                }
                rhs[a] = s;
            }
            let next = solve_spd(gram, rhs).ok_or_else(|| Error::Collinear {
                index: subset[m - 1],
                name: x.name(subset[m - 1]).to_string(),
            })?;

            let next_residuals: Vec<f64> = (0..n)
                .map(|t| {
                    let fit: f64 = (0..m).map(|a| next[a] * cols[a][t]).sum();
                    d.y()[t] - fit
                })
                .collect();
            let next_obj = objective(&next_residuals);
            if next_obj > best * (1.0 + 1e-12) + 1e-300 {
                // The majorization step cannot increase the objective;
                // float wobble at convergence is the only way here.
                break;
            }
            let stalled = best - next_obj <= 1e-14 * best.max(1e-300);
            beta = next;
            residuals = next_residuals;
            best = next_obj;
            if stalled {
                break;
            }
        }
    }

    let mut mean_psi_sq = 0.0;
    let mut sum_psi_prime = 0.0;
    for &ri in &residuals {
        let u = ri / sigma;
        let p = loss.psi(u);
        mean_psi_sq += p * p;
        sum_psi_prime += loss.psi_prime(u);
    }
    mean_psi_sq /= n as f64;

    Ok(RobustFit {
        subset: subset.to_vec(),
        coefficients: beta.iter().zip(&norms).map(|(b, nrm)| b / nrm).collect(),
        scale: sigma,
        mean_loss: best,
        mean_psi_sq,
        sum_psi_prime,
        residuals,
        iterations,
    })
}

/// `1 − F_{χ²₁}(arg)^m` without cancellation for small results.
fn chisq_power_pvalue(arg: f64, m: usize) -> Result<Prob> {
    if !(arg.is_finite() && arg >= 0.0) {
        return Err(Error::Domain(format!("chi-square argument {arg}")));
    }
    let sf = chisq_sf(arg, 1.0)?.value();
    Prob::new(-f64::exp_m1(m as f64 * f64::ln_1p(-sf)))
}

/// Asymptotic P-value of a robust objective drop.
///
/// `fit0` is the current model, `s_nu` the mean loss the best candidate
/// reached on top of it. The drop is mapped to a chi-square scale by the
/// curvature ratio of the current fit and compared against `q − m0`
/// Gaussian competitors: `1 − F_{χ²₁}(2·(Σψ′/mean ψ²)·(s0 − s_nu))^{q−m0}`.
pub fn m_step_pvalue(fit0: &RobustFit, s_nu: f64, q: usize, m0: usize) -> Result<Prob> {
    if q <= m0 {
        return Err(Error::Domain(format!("pool {q} not larger than model {m0}")));
    }
    let s0 = fit0.mean_loss;
    if !(s_nu.is_finite() && s_nu >= 0.0) || s_nu > s0 * (1.0 + 1e-9) + 1e-300 {
        return Err(Error::Domain(format!(
            "candidate loss {s_nu} exceeds current loss {s0}"
        )));
    }
    let drop = (s0 - s_nu).max(0.0);
    if drop == 0.0 {
        return Prob::new(1.0);
    }
    if fit0.mean_psi_sq <= 0.0 {
        return Err(Error::Domain("degenerate fit: zero mean squared psi".into()));
    }
    let arg = 2.0 * (fit0.sum_psi_prime / fit0.mean_psi_sq) * drop;
    chisq_power_pvalue(arg, q - m0)
}

/// Scale recursion after a model grows: the previous scale is multiplied
/// by the root mean of `psi(r/σ)²` over `(n − m0 − 1)` degrees of freedom,
/// Fisher-consistent through `E psi(Z)²`.
///
/// `m0` is the size of the model the step started from, so the divisor
/// matches the residual degrees of freedom of the enlarged fit. A zero
/// result (all residuals inside machine zero) is floored at `1e-12·σ₀` so
/// downstream divisions stay finite.
pub fn scale_update(residuals: &[f64], sigma0: f64, loss: &HuberLoss, m0: usize) -> Result<f64> {
    let n = residuals.len();
    if n <= m0 + 1 {
        return Err(Error::Data(format!(
            "scale update needs n > m0 + 1, got n = {n}, m0 = {m0}"
        )));
    }
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {sigma0}")));
    }
    let sum_psi_sq: f64 = residuals
        .iter()
        .map(|&ri| {
            let p = loss.psi(ri / sigma0);
            p * p
        })
        .sum();
    let cf = loss.expected_psi_sq();
    let sigma1 = sigma0 * (sum_psi_sq / ((n - m0 - 1) as f64 * cf)).sqrt();
    Ok(sigma1.max(1e-12 * sigma0))
}

/// A smooth response function and its derivative, for nonlinear least
/// squares P-values.
pub trait Link: Sync {
    fn eval(&self, u: f64) -> f64;
    fn deriv(&self, u: f64) -> f64;
}

/// `g(u) = u`: plain least squares as a nonlinear model.
pub struct IdentityLink;

impl Link for IdentityLink {
    fn eval(&self, u: f64) -> f64 {
        u
    }
    fn deriv(&self, _u: f64) -> f64 {
        1.0
    }
}

/// `g(u) = exp(u)/(1 + exp(u))`, the logistic response.
pub struct LogisticLink;

impl Link for LogisticLink {
    fn eval(&self, u: f64) -> f64 {
        1.0 / (1.0 + (-u).exp())
    }
    fn deriv(&self, u: f64) -> f64 {
        let p = self.eval(u);
        p * (1.0 - p)
    }
}

/// Asymptotic P-value of a squared-error drop under a nonlinear response.
///
/// `beta` are the fitted coefficients of the current model `subset`, and
/// `drop` is `ss0 − ss_nu`, the reduction in total squared residuals the
/// candidate achieved. The drop is standardized by the linearization
/// weights `g'(xᵀβ)²` at the current fit:
/// `arg = drop · Σ g'² / Σ r²g'²`, then `1 − F_{χ²₁}(arg)^{q−m0}`.
pub fn nonlinear_step_pvalue(
    d: &Dataset,
    subset: &[usize],
    beta: &[f64],
    link: &dyn Link,
    drop: f64,
    q: usize,
    m0: usize,
) -> Result<Prob> {
    if q <= m0 {
        return Err(Error::Domain(format!("pool {q} not larger than model {m0}")));
    }
    if beta.len() != subset.len() {
        return Err(Error::Data(format!(
            "{} coefficients for {} columns",
            beta.len(),
            subset.len()
        )));
    }
    if !(drop.is_finite() && drop >= 0.0) {
        return Err(Error::Domain(format!("objective drop {drop} must be nonnegative")));
    }
    let x = d.x();
    let n = d.n();
    let mut sum_w = 0.0;
    let mut sum_r2w = 0.0;
    for t in 0..n {
        let eta: f64 = subset
            .iter()
            .zip(beta)
            .map(|(&j, &bj)| bj * x.column(j)[t])
            .sum();
        let g1 = link.deriv(eta);
        let w = g1 * g1;
        let r = d.y()[t] - link.eval(eta);
        sum_w += w;
        sum_r2w += r * r * w;
    }
    if sum_r2w <= 0.0 {
        return Err(Error::Domain(
            "zero weighted residual sum; the fit is exact or all weights vanish".into(),
        ));
    }
    chisq_power_pvalue(drop * sum_w / sum_r2w, q - m0)
}

/// Logistic maximum likelihood state for a column subset.
#[derive(Debug, Clone)]
struct LogisticFit {
    #[allow(dead_code)]
    coefficients: Vec<f64>,
    /// Fitted probabilities.
    probs: Vec<f64>,
    /// Kullback-Leibler discrepancy `−Σ [y ln p + (1−y) ln(1−p)]`.
    kl: f64,
}

/// Damped Newton logistic regression. `label` names the fit in errors.
///
/// Declares complete separation when fitted log-odds run away beyond 30
/// in absolute value, where probabilities are within 1e-13 of 0 or 1.
fn logistic_fit(d: &Dataset, subset: &[usize], label: &str) -> Result<LogisticFit> {
    let n = d.n();
    let m = subset.len();
    let x = d.x();
    let norms: Vec<f64> = subset
        .iter()
        .map(|&j| {
            let nrm = x.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 {
                return Err(Error::Collinear {
                    index: j,
                    name: x.name(j).to_string(),
                });
            }
            Ok(nrm)
        })
        .collect::<Result<_>>()?;
    let cols: Vec<Vec<f64>> = subset
        .iter()
        .zip(&norms)
        .map(|(&j, &nrm)| x.column(j).iter().map(|v| v / nrm).collect())
        .collect();
    let y = d.y();

    let kl_of = |eta: &[f64]| -> f64 {
        eta.iter()
            .zip(y)
            .map(|(&e, &yi)| {
                // −[y ln p + (1−y) ln(1−p)] = ln(1+e^η) − yη, stably.
                let soft = if e > 0.0 { e + f64::ln_1p((-e).exp()) } else { f64::ln_1p(e.exp()) };
                soft - yi * e
            })
            .sum()
    };

    let mut beta = vec![0.0; m];
    let mut eta = vec![0.0; n];
    let mut kl = kl_of(&eta);
    let tol = 1e-8 * n as f64;

    for _iter in 0..100 {
        let probs: Vec<f64> = eta.iter().map(|&e| 1.0 / (1.0 + (-e).exp())).collect();
        if m == 0 {
            return Ok(LogisticFit {
                coefficients: beta,
                probs,
                kl,
            });
        }
        let grad: Vec<f64> = cols
            .iter()
            .map(|col| {
                col.iter()
                    .zip(&probs)
                    .zip(y)
                    .map(|((&ci, &pi), &yi)| ci * (pi - yi))
                    .sum::<f64>()
            })
            .collect();
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm <= tol {
            return Ok(LogisticFit {
                coefficients: beta.iter().zip(&norms).map(|(b, nrm)| b / nrm).collect(),
                probs,
                kl,
            });
        }
        let mut hess = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in a..m {
                let mut s = 0.0;
                for t in 0..n {
                    let w = probs[t] * (1.0 - probs[t]);
                    s += w * cols[a][t] * cols[b][t];
                }
                hess[a][b] = s;
                hess[b][a] = s;
            }
        }
        let step = solve_spd(hess, grad.clone()).ok_or_else(|| Error::NonConvergence {
            routine: "logistic_fit",
            detail: format!("singular information matrix for {label}"),
        })?;

        // Step halving keeps the discrepancy decreasing.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _half in 0..40 {
            let cand_beta: Vec<f64> = beta
                .iter()
                .zip(&step)
                .map(|(b, s)| b - lambda * s)
                .collect();
            let cand_eta: Vec<f64> = (0..n)
                .map(|t| (0..m).map(|a| cand_beta[a] * cols[a][t]).sum())
                .collect();
            let cand_kl = kl_of(&cand_eta);
            if cand_kl <= kl {
                beta = cand_beta;
                eta = cand_eta;
                kl = cand_kl;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // No descent direction left: numerically converged.
            let probs: Vec<f64> = eta.iter().map(|&e| 1.0 / (1.0 + (-e).exp())).collect();
            return Ok(LogisticFit {
                coefficients: beta.iter().zip(&norms).map(|(b, nrm)| b / nrm).collect(),
                probs,
                kl,
            });
        }
        if eta.iter().any(|&e| e.abs() > 30.0) {
            return Err(Error::Separation(label.to_string()));
        }
    }
    Err(Error::NonConvergence {
        routine: "logistic_fit",
        detail: format!("no convergence for {label} after 100 iterations"),
    })
}

/// Asymptotic P-value of adding `candidate` to a logistic model `subset`,
/// scored by the Kullback-Leibler discrepancy drop:
/// `1 − F_{χ²₁}(2·(Σ p(1−p)/Σ (y−p)²)·(kl0 − kl_nu))^{q−m0}`
/// with `p` the fitted probabilities of the current model.
pub fn kl_logistic_pvalue(
    d: &Dataset,
    subset: &[usize],
    candidate: usize,
    q: usize,
    m0: usize,
) -> Result<Prob> {
    if q <= m0 {
        return Err(Error::Domain(format!("pool {q} not larger than model {m0}")));
    }
    validate_binary(d)?;
    let x = d.x();
    if candidate >= x.q() {
        return Err(Error::Data(format!("column index {candidate} out of range")));
    }
    let null = logistic_fit(d, subset, "the current model")?;
    let mut enlarged = subset.to_vec();
    enlarged.push(candidate);
    let full = logistic_fit(d, &enlarged, x.name(candidate))?;
    let drop = (null.kl - full.kl).max(0.0);
    kl_drop_pvalue(&null, d.y(), drop, q, m0)
}

/// The chi-square mapping shared by the public KL P-value and the
/// stepwise driver: curvature ratio from the null fit, then the power law.
fn kl_drop_pvalue(null: &LogisticFit, y: &[f64], drop: f64, q: usize, m0: usize) -> Result<Prob> {
    if drop == 0.0 {
        return Prob::new(1.0);
    }
    let sum_w: f64 = null.probs.iter().map(|&p| p * (1.0 - p)).sum();
    let sum_r2: f64 = null
        .probs
        .iter()
        .zip(y)
        .map(|(&p, &yi)| (yi - p) * (yi - p))
        .sum();
    if sum_r2 <= 0.0 {
        return Err(Error::Domain(
            "the current model already fits the response exactly".into(),
        ));
    }
    chisq_power_pvalue(2.0 * (sum_w / sum_r2) * drop, q - m0)
}

fn validate_binary(d: &Dataset) -> Result<()> {
    if d.y().iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Data("the response must be 0/1".into()));
    }
    Ok(())
}

/// Configuration shared by the robust and logistic stepwise drivers.
#[derive(Debug, Clone, Serialize)]
pub struct ExtSelectionConfig {
    pub alpha: f64,
    /// Huber tuning constant; ignored by the logistic driver.
    pub c: f64,
    pub max_steps: Option<usize>,
}

impl Default for ExtSelectionConfig {
    fn default() -> Self {
        ExtSelectionConfig {
            alpha: 0.01,
            c: 1.0,
            max_steps: None,
        }
    }
}

/// One accepted covariate of a robust or logistic selection.
#[derive(Debug, Clone, Serialize)]
pub struct ExtTraceRow {
    pub index: usize,
    pub name: String,
    pub pvalue: Prob,
    /// Objective after acceptance: mean Huber loss, or total KL
    /// discrepancy.
    pub objective: f64,
}

/// Outcome of a robust or logistic stepwise run.
#[derive(Debug, Clone, Serialize)]
pub struct ExtSelectionResult {
    /// Objective of the starting model (intercept only, when present).
    pub objective0: f64,
    pub q_pool: usize,
    pub trace: Vec<ExtTraceRow>,
    /// Final robust scale; absent for the logistic driver.
    pub scale: Option<f64>,
    pub termination: TerminationReason,
}

impl ExtSelectionResult {
    pub fn selected(&self) -> Vec<usize> {
        self.trace.iter().map(|r| r.index).collect()
    }
}

fn validate_ext_config(cfg: &ExtSelectionConfig) -> Result<()> {
    if !(cfg.alpha.is_finite() && 0.0 < cfg.alpha && cfg.alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {} outside (0, 1)", cfg.alpha)));
    }
    Ok(())
}

/// Stepwise selection under the Huber loss.
///
/// The scale starts at [`initial_scale`] of the response and is updated by
/// [`scale_update`] after every acceptance. Candidates are refit in full
/// per step and judged by [`m_step_pvalue`] against the pool of all
/// columns; an intercept column enters first without a test, like in the
/// linear driver.
pub fn robust_stepwise(d: &Dataset, cfg: &ExtSelectionConfig) -> Result<ExtSelectionResult> {
    validate_ext_config(cfg)?;
    let loss = HuberLoss::new(cfg.c)?;
    let x = d.x();
    let n = d.n();
    let q_pool = x.q();
    let mut sigma = initial_scale(d.y())?;
    let mut subset: Vec<usize> = Vec::new();
    let mut trace = Vec::new();

    let mut fit0 = m_fit(d, &subset, &loss, sigma)?;
    let objective0 = fit0.mean_loss;
    if x.has_intercept() {
        let with = m_fit(d, &[0], &loss, sigma)?;
        let pvalue = m_step_pvalue(&fit0, with.mean_loss, q_pool, 0)?;
        sigma = scale_update(&with.residuals, sigma, &loss, 0)?;
        subset.push(0);
        fit0 = m_fit(d, &subset, &loss, sigma)?;
        trace.push(ExtTraceRow {
            index: 0,
            name: x.name(0).to_string(),
            pvalue,
            objective: fit0.mean_loss,
        });
    }

    let termination = loop {
        if fit0.mean_loss == 0.0 {
            break TerminationReason::ExactFit;
        }
        if let Some(cap) = cfg.max_steps {
            if trace.len() >= cap {
                break TerminationReason::StepLimit;
            }
        }
        let m0 = subset.len();
        if m0 >= q_pool || m0 + 1 >= n {
            break TerminationReason::PoolExhausted;
        }
        let candidates: Vec<usize> = (0..x.q()).filter(|j| !subset.contains(j)).collect();
        let scores: Vec<Option<(f64, usize)>> = candidates
            .par_iter()
            .map(|&j| {
                let mut trial = subset.clone();
                trial.push(j);
                match m_fit(d, &trial, &loss, sigma) {
                    Ok(fit) => Some((fit.mean_loss, j)),
                    Err(_) => None,
                }
            })
            .collect();
        let best = scores
            .into_iter()
            .flatten()
            .min_by(|a, b| a.partial_cmp(b).unwrap());
        let Some((s_best, j_best)) = best else {
            break TerminationReason::PoolExhausted;
        };
        let pvalue = m_step_pvalue(&fit0, s_best, q_pool, m0)?;
        if pvalue.value() > cfg.alpha {
            break TerminationReason::NoSignificantCandidate;
        }
        subset.push(j_best);
        let accepted = m_fit(d, &subset, &loss, sigma)?;
        sigma = scale_update(&accepted.residuals, sigma, &loss, m0)?;
        fit0 = m_fit(d, &subset, &loss, sigma)?;
        trace.push(ExtTraceRow {
            index: j_best,
            name: x.name(j_best).to_string(),
            pvalue,
            objective: fit0.mean_loss,
        });
    };

    Ok(ExtSelectionResult {
        objective0,
        q_pool,
        trace,
        scale: Some(sigma),
        termination,
    })
}

/// Stepwise logistic selection scored by the Kullback-Leibler
/// discrepancy.
///
/// Candidates are refit by maximum likelihood per step; the best drop is
/// judged by the chi-square power law against the pool of all columns. A
/// candidate that separates the response is treated as reaching zero
/// discrepancy: if accepted it ends the selection with an exact fit.
pub fn kl_stepwise(d: &Dataset, cfg: &ExtSelectionConfig) -> Result<ExtSelectionResult> {
    validate_ext_config(cfg)?;
    validate_binary(d)?;
    let x = d.x();
    let n = d.n();
    let q_pool = x.q();
    let mut subset: Vec<usize> = Vec::new();
    let mut trace = Vec::new();

    let empty = logistic_fit(d, &subset, "the empty model")?;
    let objective0 = empty.kl;
    let mut null = empty;
    if x.has_intercept() {
        let with = logistic_fit(d, &[0], x.name(0))?;
        let pvalue = kl_drop_pvalue(&null, d.y(), (null.kl - with.kl).max(0.0), q_pool, 0)?;
        subset.push(0);
        trace.push(ExtTraceRow {
            index: 0,
            name: x.name(0).to_string(),
            pvalue,
            objective: with.kl,
        });
        null = with;
    }

    let termination = loop {
        if let Some(cap) = cfg.max_steps {
            if trace.len() >= cap {
                break TerminationReason::StepLimit;
            }
        }
        let m0 = subset.len();
        if m0 >= q_pool || m0 + 1 >= n {
            break TerminationReason::PoolExhausted;
        }
        let candidates: Vec<usize> = (0..x.q()).filter(|j| !subset.contains(j)).collect();
        // A separated fit is a perfect fit: it competes with discrepancy 0.
        let scores: Vec<Option<(f64, usize, bool)>> = candidates
            .par_iter()
            .map(|&j| {
                let mut trial = subset.clone();
                trial.push(j);
                match logistic_fit(d, &trial, x.name(j)) {
                    Ok(fit) => Some((fit.kl, j, false)),
                    Err(Error::Separation(_)) => Some((0.0, j, true)),
                    Err(_) => None,
                }
            })
            .collect();
        let best = scores
            .into_iter()
            .flatten()
            .min_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
        let Some((kl_best, j_best, separated)) = best else {
            break TerminationReason::PoolExhausted;
        };
        let pvalue = kl_drop_pvalue(&null, d.y(), (null.kl - kl_best).max(0.0), q_pool, m0)?;
        if pvalue.value() > cfg.alpha {
            break TerminationReason::NoSignificantCandidate;
        }
        subset.push(j_best);
        trace.push(ExtTraceRow {
            index: j_best,
            name: x.name(j_best).to_string(),
            pvalue,
            objective: kl_best,
        });
        if separated {
            break TerminationReason::ExactFit;
        }
        null = logistic_fit(d, &subset, x.name(j_best))?;
        if null.kl == 0.0 {
            break TerminationReason::ExactFit;
        }
    };

    Ok(ExtSelectionResult {
        objective0,
        q_pool,
        trace,
        scale: None,
        termination,
    })
}

/// Cholesky solve of a symmetric positive definite system; `None` when
/// the matrix is not numerically positive definite.
fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for j in 0..m {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > 0.0) || d < 1e-13 * a[j][j].abs().max(1e-300) {
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
    }
    // Forward substitution L z = b.
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i][k] * b[k];
        }
        b[i] = s / a[i][i];
    }
    // Back substitution Lᵀ x = z.
    for i in (0..m).rev() {
        let mut s = b[i];
        for k in (i + 1)..m {
            s -= a[k][i] * b[k];
        }
        b[i] = s / a[i][i];
    }
    Some(b)
}
