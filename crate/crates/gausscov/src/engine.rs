//! Incremental least squares over a growing set of selected covariates.
//!
//! The model keeps an orthonormal basis of the selected columns (modified
//! Gram-Schmidt with one re-orthogonalization pass) together with the
//! current residual, so evaluating what a candidate column would do to the
//! residual sum of squares costs a handful of dot products instead of a
//! refit. A full scan over q candidates is O(n·q) per step via
//! [`CandidateScan`], which caches each candidate's projections and updates
//! them with a single new dot product per accepted covariate.

use crate::data::{CovariateMatrix, Dataset};
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Relative tolerance under which a column counts as collinear with the
/// selected model: collinear iff the residual norm of the column after
/// projection is below `COLLINEARITY_TOL` times its own norm.
pub const COLLINEARITY_TOL: f64 = 1e-8;

/// When the cheap norm-subtraction formula leaves less than this fraction
/// of a column's squared norm, the verdict is re-derived by explicit
/// orthogonalization, which has no cancellation problem.
const VERIFY_FLOOR: f64 = 1e-10;

/// Parallelize candidate scans only when there is enough work per step.
const PAR_SCAN_MIN_FLOPS: usize = 1 << 22;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Residual sum of squares a single candidate would reach, with a
/// collinearity flag. A collinear candidate leaves the rss unchanged and
/// must not be selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateRss {
    pub index: usize,
    pub rss: f64,
    pub collinear: bool,
}

/// Outcome of adding one covariate: the projection of the previous
/// residual on the new basis vector. Callers that maintain a
/// [`CandidateScan`] feed it back to keep cached dot products current.
#[derive(Debug, Clone, Copy)]
pub struct AddStep {
    pub index: usize,
    pub gamma: f64,
}

/// A regression model grown one covariate at a time.
#[derive(Debug, Clone)]
pub struct ActiveModel {
    selected: Vec<usize>,
    /// Orthonormal basis vectors, one per selected column.
    basis: Vec<Vec<f64>>,
    /// Upper-triangular factor: `r[j]` holds the coordinates of selected
    /// column j in `basis[0..=j]` (last entry is the diagonal).
    r: Vec<Vec<f64>>,
    /// Projections of the response on the basis vectors.
    zy: Vec<f64>,
    residual: Vec<f64>,
    rss: f64,
    /// Snapshots for exact rollback, one per selected covariate.
    undo: Vec<(Vec<f64>, f64)>,
}

impl ActiveModel {
    /// Empty model: the residual is the response itself.
    pub fn new(d: &Dataset) -> Self {
        Self::from_response(d.y())
    }

    /// Empty model over a raw response slice; lets callers regress one
    /// column of a matrix on the others without building a dataset.
    pub fn from_response(y: &[f64]) -> Self {
        let residual = y.to_vec();
        let rss = dot(&residual, &residual);
        ActiveModel {
            selected: Vec::new(),
            basis: Vec::new(),
            r: Vec::new(),
            zy: Vec::new(),
            residual,
            rss,
            undo: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.selected.len()
    }

    pub fn rss(&self) -> f64 {
        self.rss
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Projects `col` against the current basis twice (modified
    /// Gram-Schmidt with a re-orthogonalization pass). Returns the residual
    /// vector, its squared norm, and the coordinates from the first pass
    /// merged with the second.
    fn orthogonalize(&self, col: &[f64]) -> (Vec<f64>, f64, Vec<f64>) {
        let mut v = col.to_vec();
        let mut coords = vec![0.0; self.basis.len()];
        for _ in 0..2 {
            for (j, b) in self.basis.iter().enumerate() {
                let c = dot(b, &v);
                coords[j] += c;
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let norm_sq = dot(&v, &v);
        (v, norm_sq, coords)
    }

    /// Evaluates the rss each candidate column would reach if added.
    ///
    /// Uses the identity `rss_i = rss − (x_i·r)² / ‖x_i − proj(x_i)‖²`
    /// with the projection norm obtained by subtracting squared basis
    /// coordinates from the column norm; near-collinear cases are
    /// re-verified by explicit orthogonalization.
    pub fn candidate_rss(&self, x: &CovariateMatrix, candidates: &[usize]) -> Vec<CandidateRss> {
        let eval = |&i: &usize| -> CandidateRss {
            let col = x.column(i);
            let norm_sq = dot(col, col);
            if norm_sq == 0.0 {
                return CandidateRss {
                    index: i,
                    rss: self.rss,
                    collinear: true,
                };
            }
            let mut proj = 0.0;
            for b in &self.basis {
                let c = dot(b, col);
                proj += c * c;
            }
            let qn2 = norm_sq - proj;
            let xr = dot(col, &self.residual);
            self.finish_candidate(i, xr, qn2, norm_sq, col)
        };
        if candidates.len() * x.n() >= PAR_SCAN_MIN_FLOPS {
            candidates.par_iter().map(eval).collect()
        } else {
            candidates.iter().map(eval).collect()
        }
    }

    /// Turns cached scan quantities into a [`CandidateRss`], applying the
    /// collinearity policy.
    fn finish_candidate(
        &self,
        index: usize,
        xr: f64,
        qn2: f64,
        norm_sq: f64,
        col: &[f64],
    ) -> CandidateRss {
        let mut qn2 = qn2;
        if qn2 < VERIFY_FLOOR * norm_sq {
            // The subtraction formula has lost its precision; re-derive.
            let (v, explicit, _) = self.orthogonalize(col);
            if explicit < COLLINEARITY_TOL * COLLINEARITY_TOL * norm_sq {
                return CandidateRss {
                    index,
                    rss: self.rss,
                    collinear: true,
                };
            }
            let xr = dot(&v, &self.residual);
            let rss = (self.rss - xr * xr / explicit).clamp(0.0, self.rss);
            return CandidateRss {
                index,
                rss,
                collinear: false,
            };
        }
        if qn2 <= 0.0 {
            qn2 = f64::MIN_POSITIVE;
        }
        let rss = (self.rss - xr * xr / qn2).clamp(0.0, self.rss);
        CandidateRss {
            index,
            rss,
            collinear: false,
        }
    }

    /// Adds column `i` to the model, updating basis, residual, and rss.
    ///
    /// Fails with [`Error::Collinear`] when the column lies in the span of
    /// the current selection.
    pub fn add_covariate(&mut self, x: &CovariateMatrix, i: usize) -> Result<AddStep> {
        let col = x.column(i);
        let norm_sq = dot(col, col);
        let (v, vn2, mut coords) = self.orthogonalize(col);
        if norm_sq == 0.0 || vn2 < COLLINEARITY_TOL * COLLINEARITY_TOL * norm_sq {
            return Err(Error::Collinear {
                index: i,
                name: x.name(i).to_string(),
            });
        }
        let norm = vn2.sqrt();
        let b: Vec<f64> = v.iter().map(|vi| vi / norm).collect();
        let gamma = dot(&b, &self.residual);
        self.undo.push((self.residual.clone(), self.rss));
        self.residual
            .iter_mut()
            .zip(&b)
            .for_each(|(ri, bi)| *ri -= gamma * bi);
        self.rss = dot(&self.residual, &self.residual);
        coords.push(norm);
        self.r.push(coords);
        self.zy.push(gamma + dot(&b, &self.residual)); // b·y = b·(r_before) since y − r_before ⟂ b
        self.basis.push(b);
        self.selected.push(i);
        Ok(AddStep { index: i, gamma })
    }

    /// Rolls the model back to its first `k` selected covariates.
    ///
    /// Restoration is exact: the state after `truncate(k)` is bitwise the
    /// state before the (k+1)-th add.
    pub fn truncate(&mut self, k: usize) {
        while self.selected.len() > k {
            let (residual, rss) = self.undo.pop().expect("undo stack in sync");
            self.residual = residual;
            self.rss = rss;
            self.selected.pop();
            self.basis.pop();
            self.r.pop();
            self.zy.pop();
        }
    }

    /// Least-squares coefficients of the selected columns, in selection
    /// order, by back substitution against the triangular factor.
    pub fn coefficients(&self) -> Result<Vec<f64>> {
        let k = self.k();
        let mut beta = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = self.zy[i];
            for j in (i + 1)..k {
                acc -= self.r[j][i] * beta[j];
            }
            let d = self.r[i][i];
            if d == 0.0 {
                return Err(Error::NonConvergence {
                    routine: "coefficients",
                    detail: format!("zero diagonal at position {i}"),
                });
            }
            beta[i] = acc / d;
        }
        Ok(beta)
    }

    /// For each selected covariate, the rss of the model refit without it.
    ///
    /// Uses the partial-regression identity
    /// `rss(S \ i) = rss(S) + β_i² / [(XᵀX)⁻¹]_{ii}` with the inverse
    /// Gram diagonal read off the inverted triangular factor.
    pub fn drop_one_rss(&self) -> Result<Vec<f64>> {
        let k = self.k();
        let beta = self.coefficients()?;
        // G = R⁻¹, computed column by column; G is upper triangular.
        let mut g = vec![vec![0.0; k]; k];
        for c in 0..k {
            // Solve R·g_col = e_c by back substitution.
            for i in (0..=c).rev() {
                let mut acc = if i == c { 1.0 } else { 0.0 };
                for j in (i + 1)..=c {
                    acc -= self.r[j][i] * g[j][c];
                }
                g[i][c] = acc / self.r[i][i];
            }
        }
        Ok((0..k)
            .map(|i| {
                let s: f64 = (i..k).map(|m| g[i][m] * g[i][m]).sum();
                self.rss + beta[i] * beta[i] / s
            })
            .collect())
    }
}

/// Cached per-candidate quantities for repeated scans during stepwise
/// selection. After each accepted covariate only one new dot product per
/// candidate is needed.
pub struct CandidateScan {
    /// x_i · residual, kept current across adds.
    xr: Vec<f64>,
    /// Σ_j (b_j · x_i)², the squared projection onto the basis so far.
    proj: Vec<f64>,
    /// ‖x_i‖², fixed.
    norm_sq: Vec<f64>,
}

impl CandidateScan {
    /// Initializes the cache for every column of `x` against the current
    /// model state.
    pub fn new(model: &ActiveModel, x: &CovariateMatrix) -> Self {
        let n = x.n();
        let q = x.q();
        let build = |j: usize| -> (f64, f64, f64) {
            let col = x.column(j);
            let ns = dot(col, col);
            let mut proj = 0.0;
            for b in &model.basis {
                let c = dot(b, col);
                proj += c * c;
            }
            (dot(col, &model.residual), proj, ns)
        };
        let rows: Vec<(f64, f64, f64)> = if q * n >= PAR_SCAN_MIN_FLOPS {
            (0..q).into_par_iter().map(build).collect()
        } else {
            (0..q).map(build).collect()
        };
        let mut xr = Vec::with_capacity(q);
        let mut proj = Vec::with_capacity(q);
        let mut norm_sq = Vec::with_capacity(q);
        for (a, b, c) in rows {
            xr.push(a);
            proj.push(b);
            norm_sq.push(c);
        }
        CandidateScan { xr, proj, norm_sq }
    }

    /// Folds the newest basis vector (from the `AddStep` that extended
    /// `model`) into the cache: one dot product per candidate.
    pub fn update(&mut self, model: &ActiveModel, x: &CovariateMatrix, step: AddStep) {
        let b = model.basis.last().expect("update after add");
        let gamma = step.gamma;
        let n = x.n();
        let apply = |(j, (xr, proj)): (usize, (&mut f64, &mut f64))| {
            let c = dot(b, x.column(j));
            *xr -= gamma * c;
            *proj += c * c;
        };
        if self.xr.len() * n >= PAR_SCAN_MIN_FLOPS {
            self.xr
                .par_iter_mut()
                .zip(self.proj.par_iter_mut())
                .enumerate()
                .for_each(apply);
        } else {
            self.xr
                .iter_mut()
                .zip(self.proj.iter_mut())
                .enumerate()
                .for_each(apply);
        }
    }

    /// Candidate rss for column `i` from the cached quantities, with the
    /// same collinearity policy as [`ActiveModel::candidate_rss`].
    pub fn rss(&self, model: &ActiveModel, x: &CovariateMatrix, i: usize) -> CandidateRss {
        let norm_sq = self.norm_sq[i];
        if norm_sq == 0.0 {
            return CandidateRss {
                index: i,
                rss: model.rss,
                collinear: true,
            };
        }
        let qn2 = norm_sq - self.proj[i];
        model.finish_candidate(i, self.xr[i], qn2, norm_sq, x.column(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize, q: usize) -> Dataset {
        let cols: Vec<Vec<f64>> = (0..q)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let names = (0..q).map(|j| format!("x{j}")).collect();
        Dataset::from_columns(cols, names, y, false).unwrap()
    }

    /// Batch least squares by normal equations with Gaussian elimination;
    /// deliberately independent of the Gram-Schmidt engine.
    fn batch_rss(d: &Dataset, cols: &[usize]) -> f64 {
        let n = d.n();
        let k = cols.len();
        let mut gram = vec![vec![0.0; k + 1]; k];
        for (a, &ca) in cols.iter().enumerate() {
            for (b, &cb) in cols.iter().enumerate() {
                gram[a][b] = dot(d.x().column(ca), d.x().column(cb));
            }
            gram[a][k] = dot(d.x().column(ca), d.y());
        }
        // Gaussian elimination with partial pivoting.
        for p in 0..k {
            let piv = (p..k).max_by(|&i, &j| gram[i][p].abs().total_cmp(&gram[j][p].abs())).unwrap();
            gram.swap(p, piv);
            for i in (p + 1)..k {
                let f = gram[i][p] / gram[p][p];
                for j in p..=k {
                    gram[i][j] -= f * gram[p][j];
                }
            }
        }
        let mut beta = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = gram[i][k];
            for j in (i + 1)..k {
                acc -= gram[i][j] * beta[j];
            }
            beta[i] = acc / gram[i][i];
        }
        (0..n)
            .map(|row| {
                let fit: f64 = cols
                    .iter()
                    .enumerate()
                    .map(|(a, &c)| beta[a] * d.x().column(c)[row])
                    .sum();
                let e = d.y()[row] - fit;
                e * e
            })
            .sum()
    }

    #[test]
    fn candidate_rss_matches_batch_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = random_dataset(&mut rng, 20, 5);
            let mut m = ActiveModel::new(&d);
            for &j in &[0usize, 1, 2] {
                m.add_covariate(d.x(), j).unwrap();
            }
            let out = m.candidate_rss(d.x(), &[3, 4]);
            for c in out {
                let oracle = batch_rss(&d, &[0, 1, 2, c.index]);
                assert!(
                    ((c.rss - oracle) / oracle).abs() < 1e-8,
                    "candidate {}: {} vs {}",
                    c.index,
                    c.rss,
                    oracle
                );
            }
        }
    }

    #[test]
    fn add_covariate_reaches_predicted_rss() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = random_dataset(&mut rng, 50, 8);
        let mut m = ActiveModel::new(&d);
        for j in 0..6 {
            let pred = m.candidate_rss(d.x(), &[j])[0];
            assert!(!pred.collinear);
            let prev = m.rss();
            m.add_covariate(d.x(), j).unwrap();
            assert!(m.rss() <= prev + 1e-12);
            let denom = pred.rss.max(1e-300);
            assert!(
                ((m.rss() - pred.rss) / denom).abs() < 1e-10,
                "step {j}: {} vs {}",
                m.rss(),
                pred.rss
            );
        }
    }

    #[test]
    fn basis_stays_orthonormal_after_200_adds() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = random_dataset(&mut rng, 300, 200);
        let mut m = ActiveModel::new(&d);
        for j in 0..200 {
            m.add_covariate(d.x(), j).unwrap();
        }
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            for j in i..200 {
                let g = dot(&m.basis()[i], &m.basis()[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        assert!(worst < 1e-8, "orthonormality drift {worst}");
    }

    #[test]
    fn final_rss_independent_of_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let d = random_dataset(&mut rng, 40, 6);
        let orders = [[0usize, 1, 2, 3], [3, 1, 0, 2], [2, 3, 1, 0]];
        let mut values = Vec::new();
        for ord in &orders {
            let mut m = ActiveModel::new(&d);
            for &j in ord {
                m.add_covariate(d.x(), j).unwrap();
            }
            values.push(m.rss());
        }
        for w in values.windows(2) {
            assert!(((w[0] - w[1]) / w[0]).abs() < 1e-10, "{values:?}");
        }
    }

    #[test]
    fn collinear_columns_are_flagged_and_rejected() {
        let base: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let dup: Vec<f64> = base.iter().map(|v| 2.0 * v).collect();
        let other: Vec<f64> = (0..30).map(|i| (i as f64 * 0.11).cos()).collect();
        let y: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let d = Dataset::from_columns(
            vec![base, dup, other],
            vec!["a".into(), "b".into(), "c".into()],
            y,
            false,
        )
        .unwrap();
        let mut m = ActiveModel::new(&d);
        m.add_covariate(d.x(), 0).unwrap();
        let scan = m.candidate_rss(d.x(), &[1, 2]);
        assert!(scan[0].collinear);
        assert_eq!(scan[0].rss, m.rss());
        assert!(!scan[1].collinear);
        assert!(matches!(
            m.add_covariate(d.x(), 1),
            Err(Error::Collinear { index: 1, .. })
        ));
    }

    #[test]
    fn truncate_restores_state_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let d = random_dataset(&mut rng, 25, 6);
        let mut m = ActiveModel::new(&d);
        m.add_covariate(d.x(), 0).unwrap();
        m.add_covariate(d.x(), 1).unwrap();
        let saved_residual = m.residual().to_vec();
        let saved_rss = m.rss();
        m.add_covariate(d.x(), 2).unwrap();
        m.add_covariate(d.x(), 3).unwrap();
        m.truncate(2);
        assert_eq!(m.selected(), &[0, 1]);
        assert_eq!(m.rss(), saved_rss);
        assert_eq!(m.residual(), saved_residual.as_slice());
    }

    #[test]
    fn coefficients_reproduce_batch_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let d = random_dataset(&mut rng, 35, 5);
        let mut m = ActiveModel::new(&d);
        for j in 0..5 {
            m.add_covariate(d.x(), j).unwrap();
        }
        let beta = m.coefficients().unwrap();
        let n = d.n();
        let rss: f64 = (0..n)
            .map(|row| {
                let fit: f64 = (0..5).map(|j| beta[j] * d.x().column(j)[row]).sum();
                let e = d.y()[row] - fit;
                e * e
            })
            .sum();
        assert!(((rss - m.rss()) / m.rss()).abs() < 1e-9);
    }

    #[test]
    fn drop_one_rss_matches_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let d = random_dataset(&mut rng, 30, 6);
        let mut m = ActiveModel::new(&d);
        for j in 0..6 {
            m.add_covariate(d.x(), j).unwrap();
        }
        let dropped = m.drop_one_rss().unwrap();
        for leave in 0..6 {
            let cols: Vec<usize> = (0..6).filter(|&j| j != leave).collect();
            let oracle = batch_rss(&d, &cols);
            assert!(
                ((dropped[leave] - oracle) / oracle).abs() < 1e-9,
                "leave {leave}: {} vs {}",
                dropped[leave],
                oracle
            );
        }
    }

    #[test]
    fn incremental_scan_agrees_with_stateless() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let d = random_dataset(&mut rng, 60, 12);
        let mut m = ActiveModel::new(&d);
        let mut scan = CandidateScan::new(&m, d.x());
        for j in 0..5 {
            let step = m.add_covariate(d.x(), j).unwrap();
            scan.update(&m, d.x(), step);
            for i in (j + 1)..12 {
                let fast = scan.rss(&m, d.x(), i);
                let slow = m.candidate_rss(d.x(), &[i])[0];
                let denom = slow.rss.max(1e-300);
                assert!(
                    ((fast.rss - slow.rss) / denom).abs() < 1e-10,
                    "step {j} candidate {i}"
                );
                assert_eq!(fast.collinear, slow.collinear);
            }
        }
    }

    #[test]
    fn candidate_rss_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let n = 40;
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut scaled = cols.clone();
        for v in scaled[3].iter_mut() {
            *v *= 7.3;
        }
        let names: Vec<String> = (0..4).map(|j| format!("x{j}")).collect();
        let d1 = Dataset::from_columns(cols, names.clone(), y.clone(), false).unwrap();
        let d2 = Dataset::from_columns(scaled, names, y, false).unwrap();
        let mut m1 = ActiveModel::new(&d1);
        let mut m2 = ActiveModel::new(&d2);
        for j in 0..2 {
            m1.add_covariate(d1.x(), j).unwrap();
            m2.add_covariate(d2.x(), j).unwrap();
        }
        let r1 = m1.candidate_rss(d1.x(), &[3])[0].rss;
        let r2 = m2.candidate_rss(d2.x(), &[3])[0].rss;
        assert!(((r1 - r2) / r1).abs() < 1e-12, "{r1} vs {r2}");
    }
}
