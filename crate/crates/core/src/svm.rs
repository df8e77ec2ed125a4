//! Soft-margin support vector machine trained by sequential minimal
//! optimization.
//!
//! The solver works on the dual problem
//! `min (1/2) a^T Q a - e^T a` s.t. `0 <= a_i <= C`, `sum a_i y_i = 0`,
//! with `Q_ij = y_i y_j K(x_i, x_j)`. Working pairs are chosen by maximal
//! KKT violation: `i = argmax_{I_up} (y_i - u_i)`, `j = argmin_{I_low}`,
//! and the solver stops when the violation gap falls within tolerance.
//! Probabilities come from a Platt sigmoid fitted on out-of-fold decision
//! values of a 5-fold cross-validation over the training split.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::{ColumnStats, FeatureMatrix};
use crate::rng::stream_rng;

/// Alphas below this are treated as zero; points above it become support
/// vectors in the stored model.
pub const SV_THRESHOLD: f64 = 1e-9;

/// Default KKT tolerance.
pub const DEFAULT_TOL: f64 = 1e-3;

/// Kernel function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Kernel request: RBF gamma defaults to `1 / (d * mean per-feature
/// variance)` of the training matrix when not given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: Option<f64> },
}

impl KernelSpec {
    fn resolve(&self, rows: &[&[f64]]) -> Kernel {
        match self {
            KernelSpec::Linear => Kernel::Linear,
            KernelSpec::Rbf { gamma: Some(g) } => Kernel::Rbf { gamma: *g },
            KernelSpec::Rbf { gamma: None } => {
                let n = rows.len() as f64;
                let d = rows[0].len();
                let mut mean_var = 0.0;
                for j in 0..d {
                    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                    let var = rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
                    mean_var += var / d as f64;
                }
                let denom = d as f64 * mean_var;
                Kernel::Rbf {
                    gamma: if denom > 0.0 { 1.0 / denom } else { 1.0 },
                }
            }
        }
    }
}

/// Platt sigmoid parameters: `P(organic | f) = 1 / (1 + exp(a*f + b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattScaling {
    pub a: f64,
    pub b: f64,
}

/// A trained SVM. `dual_coeffs[i]` stores `alpha_i * y_i` for support
/// vector i, with organic mapped to +1 and inorganic to -1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub version: u32,
    pub kernel: Kernel,
    pub feature_names: Vec<String>,
    pub standardization: Vec<ColumnStats>,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub platt: PlattScaling,
}

pub const MODEL_VERSION: u32 = 1;

fn label_to_y(label: Label) -> f64 {
    match label {
        Label::Organic => 1.0,
        Label::Inorganic => -1.0,
    }
}

/// Diagnostics of one SMO run, kept for verification.
#[derive(Debug, Clone)]
pub struct SmoResult {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Final maximal KKT violation gap.
    pub gap: f64,
}

/// Dual objective `sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij`.
pub fn dual_objective(rows: &[&[f64]], y: &[f64], alpha: &[f64], kernel: Kernel) -> f64 {
    let n = y.len();
    let mut obj: f64 = alpha.iter().sum();
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alpha[j] == 0.0 {
                continue;
            }
            obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * kernel.eval(rows[i], rows[j]);
        }
    }
    obj
}

/// Run SMO with maximal-violating-pair selection. The update budget is
/// 10*n passes of n pair updates each.
pub fn smo(rows: &[&[f64]], y: &[f64], c: f64, kernel: Kernel, tol: f64) -> Result<SmoResult> {
    let n = rows.len();
    debug_assert_eq!(y.len(), n);
    // cache the full kernel matrix; training sets here are small
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(rows[i], rows[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }

    let mut alpha = vec![0.0f64; n];
    // gradient of the dual objective: grad_i = sum_j Q_ij a_j - 1
    let mut grad = vec![-1.0f64; n];
    let max_updates = 10 * n * n;
    let mut updates = 0usize;
    let mut gap = f64::INFINITY;
    // alphas within dust of a bound count as bounded, or the pair search
    // can stall on a direction with no usable room
    let eps_bound = 1e-12 * c.max(1.0);
    let at_lo = |a: f64| a <= eps_bound;
    let at_hi = |a: f64| a >= c - eps_bound;

    loop {
        // i maximizes y_i - u_i over I_up, j minimizes over I_low,
        // where y_i - u_i = -y_i * grad_i
        let mut i_best: Option<usize> = None;
        let mut m_up = f64::NEG_INFINITY;
        let mut j_best: Option<usize> = None;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = (y[t] > 0.0 && !at_hi(alpha[t])) || (y[t] < 0.0 && !at_lo(alpha[t]));
            let in_low = (y[t] > 0.0 && !at_lo(alpha[t])) || (y[t] < 0.0 && !at_hi(alpha[t]));
            if in_up && v > m_up {
                m_up = v;
                i_best = Some(t);
            }
            if in_low && v < m_low {
                m_low = v;
                j_best = Some(t);
            }
        }
        let (i, j) = match (i_best, j_best) {
            (Some(i), Some(j)) => (i, j),
            _ => break, // one side empty: all points bounded consistently
        };
        gap = m_up - m_low;
        if gap <= tol {
            break;
        }
        if updates >= max_updates {
            return Err(Error::SmoNoConvergence {
                iterations: updates,
            });
        }

        // Platt-style analytic two-variable update
        let e_i = y[i] * grad[i]; // u_i - y_i
        let e_j = y[j] * grad[j];
        let eta = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(1e-12);
        let (lo, hi) = if y[i] != y[j] {
            (
                (alpha[j] - alpha[i]).max(0.0),
                (c + alpha[j] - alpha[i]).min(c),
            )
        } else {
            (
                (alpha[i] + alpha[j] - c).max(0.0),
                (alpha[i] + alpha[j]).min(c),
            )
        };
        let old_i = alpha[i];
        let old_j = alpha[j];
        let unclipped = old_j + y[j] * (e_i - e_j) / eta;
        let snap = |a: f64| {
            if at_lo(a) {
                0.0
            } else if at_hi(a) {
                c
            } else {
                a
            }
        };
        let new_j = snap(unclipped.clamp(lo, hi));
        let new_i = snap((old_i + y[i] * y[j] * (old_j - new_j)).clamp(0.0, c));
        let d_i = new_i - old_i;
        let d_j = new_j - old_j;
        if d_i.abs() < 1e-15 && d_j.abs() < 1e-15 {
            // numerically stuck pair; the gap cannot shrink further
            break;
        }
        alpha[i] = new_i;
        alpha[j] = new_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * d_i * k[i * n + t] + y[j] * d_j * k[j * n + t]);
        }
        updates += 1;
    }

    // bias from free support vectors, midpoint of the violation bounds
    // otherwise; both lie inside [m_low, m_up] so KKT holds within tol
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        if alpha[t] > SV_THRESHOLD && alpha[t] < c - SV_THRESHOLD {
            free_sum += -y[t] * grad[t];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = (y[t] > 0.0 && !at_hi(alpha[t])) || (y[t] < 0.0 && !at_lo(alpha[t]));
            let in_low = (y[t] > 0.0 && !at_lo(alpha[t])) || (y[t] < 0.0 && !at_hi(alpha[t]));
            if in_up {
                m_up = m_up.max(v);
            }
            if in_low {
                m_low = m_low.min(v);
            }
        }
        if m_up.is_finite() && m_low.is_finite() {
            0.5 * (m_up + m_low)
        } else {
            0.0
        }
    };

    Ok(SmoResult {
        alpha,
        bias,
        iterations: updates,
        gap,
    })
}

/// Fit a Platt sigmoid by regularized maximum likelihood (Newton iterations
/// with backtracking). `y` uses +1/-1 coding.
fn platt_fit(dec: &[f64], y: &[f64]) -> PlattScaling {
    let prior1 = y.iter().filter(|&&v| v > 0.0).count() as f64;
    let prior0 = y.len() as f64 - prior1;
    let hi_t = (prior1 + 1.0) / (prior1 + 2.0);
    let lo_t = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = y.iter().map(|&v| if v > 0.0 { hi_t } else { lo_t }).collect();

    let fval = |a: f64, b: f64| -> f64 {
        let mut f = 0.0;
        for (i, &d) in dec.iter().enumerate() {
            let z = a * d + b;
            if z >= 0.0 {
                f += t[i] * z + (1.0 + (-z).exp()).ln();
            } else {
                f += (t[i] - 1.0) * z + (1.0 + z.exp()).ln();
            }
        }
        f
    };

    let mut a = 0.0;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let mut best = fval(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21) = (1e-12, 1e-12, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for (i, &d) in dec.iter().enumerate() {
            let z = a * d + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += d * d * d2;
            h22 += d2;
            h21 += d * d2;
            let d1 = t[i] - p;
            g1 += d * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-10 {
            let na = a + step * da;
            let nb = b + step * db;
            let nf = fval(na, nb);
            if nf < best + 1e-4 * step * gd {
                a = na;
                b = nb;
                best = nf;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    // degenerate calibration (flat or inverted decisions) falls back to a
    // neutral monotone mapping so probability stays increasing in f
    if !(a < 0.0) || !a.is_finite() || !b.is_finite() {
        return PlattScaling { a: -1.0, b: 0.0 };
    }
    PlattScaling { a, b }
}

/// Stratified k-fold assignment, deterministic per seed.
fn fold_assignment(labels: &[Label], folds: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut assignment = vec![0usize; labels.len()];
    for (class_stream, class) in [(10u64, Label::Organic), (11, Label::Inorganic)] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        let mut rng = stream_rng(seed, class_stream);
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    assignment
}

/// Train an SVM on a standardized feature matrix. All rows must be labeled.
pub fn svm_fit(
    matrix: &FeatureMatrix,
    c: f64,
    kernel: KernelSpec,
    seed: u64,
) -> Result<SvmModel> {
    Ok(svm_fit_detailed(matrix, c, kernel, seed, DEFAULT_TOL)?.0)
}

/// [`svm_fit`] that also returns solver diagnostics (per-point alphas,
/// iteration count, final KKT gap) for verification.
pub fn svm_fit_detailed(
    matrix: &FeatureMatrix,
    c: f64,
    kernel: KernelSpec,
    seed: u64,
    tol: f64,
) -> Result<(SvmModel, SmoResult)> {
    if c <= 0.0 {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let labels = matrix.labels_required()?;
    let n = matrix.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows { need: 2, got: n });
    }
    let y: Vec<f64> = labels.iter().map(|&l| label_to_y(l)).collect();
    if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v < 0.0) {
        return Err(Error::SingleClass);
    }
    let rows: Vec<&[f64]> = matrix.values.iter().map(|r| r.as_slice()).collect();
    if rows.iter().any(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteInput);
    }
    let kernel = kernel.resolve(&rows);

    let fit = smo(&rows, &y, c, kernel, tol)?;

    // out-of-fold decision values for Platt scaling
    let folds = 5usize;
    let mut oof: Vec<f64> = vec![f64::NAN; n];
    let mut cv_ok = n >= 2 * folds;
    if cv_ok {
        let assignment = fold_assignment(&labels, folds, seed);
        'cv: for fold in 0..folds {
            let train_idx: Vec<usize> = (0..n).filter(|i| assignment[*i] != fold).collect();
            let test_idx: Vec<usize> = (0..n).filter(|i| assignment[*i] == fold).collect();
            if test_idx.is_empty() {
                continue;
            }
            let sub_rows: Vec<&[f64]> = train_idx.iter().map(|&i| rows[i]).collect();
            let sub_y: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();
            if sub_y.iter().all(|&v| v > 0.0) || sub_y.iter().all(|&v| v < 0.0) {
                cv_ok = false;
                break 'cv;
            }
            let sub = match smo(&sub_rows, &sub_y, c, kernel, tol) {
                Ok(s) => s,
                Err(_) => {
                    cv_ok = false;
                    break 'cv;
                }
            };
            for &i in &test_idx {
                let mut f = sub.bias;
                for (t, &ti) in train_idx.iter().enumerate() {
                    if sub.alpha[t] > SV_THRESHOLD {
                        f += sub.alpha[t] * sub_y[t] * kernel.eval(rows[ti], rows[i]);
                    }
                }
                oof[i] = f;
            }
        }
    }
    let decisions: Vec<f64> = if cv_ok && oof.iter().all(|v| v.is_finite()) {
        oof
    } else {
        // tiny or degenerate splits: fall back to in-sample decisions
        (0..n)
            .map(|i| {
                let mut f = fit.bias;
                for t in 0..n {
                    if fit.alpha[t] > SV_THRESHOLD {
                        f += fit.alpha[t] * y[t] * kernel.eval(rows[t], rows[i]);
                    }
                }
                f
            })
            .collect()
    };
    let platt = platt_fit(&decisions, &y);

    let mut support_vectors = Vec::new();
    let mut dual_coeffs = Vec::new();
    for i in 0..n {
        if fit.alpha[i] > SV_THRESHOLD {
            support_vectors.push(matrix.values[i].clone());
            dual_coeffs.push(fit.alpha[i] * y[i]);
        }
    }
    let model = SvmModel {
        version: MODEL_VERSION,
        kernel,
        feature_names: matrix.feature_names.clone(),
        standardization: matrix
            .standardization
            .clone()
            .unwrap_or_else(|| vec![ColumnStats { mean: 0.0, sd: 1.0 }; matrix.n_cols()]),
        support_vectors,
        dual_coeffs,
        bias: fit.bias,
        c,
        platt,
    };
    Ok((model, fit))
}

impl SvmModel {
    /// Decision value `sum_i alpha_i y_i K(sv_i, row) + b` on an
    /// already-standardized row.
    pub fn decision(&self, row: &[f64]) -> Result<f64> {
        let d = self.support_vectors.first().map_or(row.len(), Vec::len);
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        let mut f = self.bias;
        for (sv, coeff) in self.support_vectors.iter().zip(&self.dual_coeffs) {
            f += coeff * self.kernel.eval(sv, row);
        }
        Ok(f)
    }

    /// Label prediction; a decision of exactly 0 goes to the positive
    /// (organic) class.
    pub fn predict(&self, row: &[f64]) -> Result<Label> {
        Ok(if self.decision(row)? >= 0.0 {
            Label::Organic
        } else {
            Label::Inorganic
        })
    }

    /// Platt probability of the organic class, clamped into (0, 1).
    pub fn proba_organic(&self, row: &[f64]) -> Result<f64> {
        let f = self.decision(row)?;
        let z = self.platt.a * f + self.platt.b;
        let p = if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        };
        Ok(p.clamp(1e-12, 1.0 - 1e-12))
    }

    /// Probability of an arbitrary label.
    pub fn proba(&self, row: &[f64], label: Label) -> Result<f64> {
        let p = self.proba_organic(row)?;
        Ok(match label {
            Label::Organic => p,
            Label::Inorganic => 1.0 - p,
        })
    }

    /// Check that the input feature names match the model's, erroring with
    /// the difference otherwise.
    pub fn check_features(&self, names: &[String]) -> Result<()> {
        if names != self.feature_names.as_slice() {
            return Err(Error::FeatureNameMismatch(format!(
                "model expects {:?}, got {:?}",
                self.feature_names, names
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<SvmModel> {
        let model: SvmModel = serde_json::from_str(json)?;
        if model.version != MODEL_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported SVM model version {}",
                model.version
            )));
        }
        Ok(model)
    }
}

/// Largest KKT violation of a fitted solution over its training set:
/// `alpha = 0` needs `y f >= 1`, free needs `y f = 1`, `alpha = C` needs
/// `y f <= 1`, each within the returned slack.
pub fn kkt_max_violation(
    rows: &[&[f64]],
    y: &[f64],
    alpha: &[f64],
    bias: f64,
    c: f64,
    kernel: Kernel,
) -> f64 {
    let n = rows.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut f = bias;
        for t in 0..n {
            if alpha[t] > 0.0 {
                f += alpha[t] * y[t] * kernel.eval(rows[t], rows[i]);
            }
        }
        let margin = y[i] * f;
        let v = if alpha[i] <= SV_THRESHOLD {
            (1.0 - margin).max(0.0)
        } else if alpha[i] >= c - SV_THRESHOLD {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}
