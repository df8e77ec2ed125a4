//! Binary classification evaluation: confusion matrix, the full
//! Table-1-style statistic suite, ROC sweep and tie-adjusted AUC.
//!
//! Conventions: the confusion matrix is predicted x actual with the
//! positive class first; the accuracy interval is exact Clopper-Pearson;
//! the no-information-rate comparison and McNemar's test are exact
//! binomial (McNemar capped at 1).

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, Binomial, ContinuousCDF, DiscreteCDF};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Evaluation report for one classifier on one labeled set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    /// `confusion[p][a]`: predicted class p, actual class a, positive
    /// class at index 0.
    pub confusion: [[u64; 2]; 2],
    pub positive_class: Label,
    pub accuracy: f64,
    pub accuracy_ci_low: f64,
    pub accuracy_ci_high: f64,
    /// No-information rate: the larger class prevalence.
    pub nir: f64,
    /// One-sided exact binomial p-value for accuracy exceeding the NIR.
    pub acc_vs_nir_pvalue: f64,
    pub kappa: f64,
    /// Exact binomial McNemar p-value on the discordant cells, capped at 1.
    pub mcnemar_pvalue: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub ppv: f64,
    pub npv: f64,
    pub prevalence: f64,
    pub detection_rate: f64,
    pub detection_prevalence: f64,
    pub balanced_accuracy: f64,
    /// Harmonic mean of PPV and sensitivity.
    pub f_score: f64,
    /// ROC sweep points as (false positive rate, true positive rate);
    /// empty when the truth is single-class.
    pub roc_points: Vec<(f64, f64)>,
    /// Tie-adjusted rank-statistic AUC; absent when the truth is
    /// single-class.
    pub auc: Option<f64>,
}

/// Beta quantile by bisection on the regularized incomplete beta; the
/// library's own inverse is only accurate to ~1e-5, not enough for
/// four-decimal interval checks.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let dist = match Beta::new(a, b) {
        Ok(d) => d,
        Err(_) => return f64::NAN,
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn clopper_pearson(successes: u64, n: u64, level: f64) -> (f64, f64) {
    let alpha = 1.0 - level;
    let x = successes as f64;
    let nf = n as f64;
    let low = if successes == 0 {
        0.0
    } else {
        beta_quantile(x, nf - x + 1.0, alpha / 2.0)
    };
    let high = if successes == n {
        1.0
    } else {
        beta_quantile(x + 1.0, nf - x, 1.0 - alpha / 2.0)
    };
    (low, high)
}

/// One-sided exact binomial tail `P(X >= x)` for `X ~ Bin(n, p)`.
fn binomial_upper_tail(x: u64, n: u64, p: f64) -> f64 {
    if x == 0 {
        return 1.0;
    }
    // P(X >= x) equals the regularized incomplete beta I_p(x, n - x + 1)
    Beta::new(x as f64, (n - x + 1) as f64)
        .map(|b| b.cdf(p))
        .unwrap_or(1.0)
}

fn mcnemar_exact(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let m = b.min(c);
    let p = Binomial::new(0.5, n)
        .map(|d| 2.0 * d.cdf(m))
        .unwrap_or(1.0);
    p.min(1.0)
}

/// Compute every confusion-matrix statistic of the report. ROC fields stay
/// empty; [`evaluate`] fills them from scores.
pub fn evaluate_confusion(confusion: [[u64; 2]; 2], positive_class: Label) -> EvalReport {
    let tp = confusion[0][0] as f64;
    let fp = confusion[0][1] as f64;
    let fn_ = confusion[1][0] as f64;
    let tn = confusion[1][1] as f64;
    let total = tp + fp + fn_ + tn;
    let correct = tp + tn;

    let accuracy = correct / total;
    let (ci_low, ci_high) = clopper_pearson(correct as u64, total as u64, 0.95);
    let actual_pos = tp + fn_;
    let actual_neg = fp + tn;
    let nir = actual_pos.max(actual_neg) / total;
    let acc_vs_nir_pvalue = binomial_upper_tail(correct as u64, total as u64, nir);

    let pred_pos = tp + fp;
    let pred_neg = fn_ + tn;
    let pe = (pred_pos * actual_pos + pred_neg * actual_neg) / (total * total);
    let kappa = if (1.0 - pe).abs() < 1e-15 {
        1.0
    } else {
        (accuracy - pe) / (1.0 - pe)
    };

    let mcnemar_pvalue = mcnemar_exact(confusion[0][1], confusion[1][0]);

    let sensitivity = tp / actual_pos;
    let specificity = tn / actual_neg;
    let ppv = tp / pred_pos;
    let npv = tn / pred_neg;
    let prevalence = actual_pos / total;
    let detection_rate = tp / total;
    let detection_prevalence = pred_pos / total;
    let balanced_accuracy = 0.5 * (sensitivity + specificity);
    let f_score = 2.0 * ppv * sensitivity / (ppv + sensitivity);

    EvalReport {
        confusion,
        positive_class,
        accuracy,
        accuracy_ci_low: ci_low,
        accuracy_ci_high: ci_high,
        nir,
        acc_vs_nir_pvalue,
        kappa,
        mcnemar_pvalue,
        sensitivity,
        specificity,
        ppv,
        npv,
        prevalence,
        detection_rate,
        detection_prevalence,
        balanced_accuracy,
        f_score,
        roc_points: Vec::new(),
        auc: None,
    }
}

/// ROC curve by sweeping score thresholds, highest first. `scores` are
/// scores for the positive class.
fn roc_curve(scores: &[f64], truth: &[Label], positive: Label) -> Vec<(f64, f64)> {
    let n_pos = truth.iter().filter(|&&l| l == positive).count() as f64;
    let n_neg = truth.len() as f64 - n_pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut i = 0;
    while i < order.len() {
        // consume all examples tied at this threshold together
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if truth[order[i]] == positive {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push((fp / n_neg, tp / n_pos));
    }
    points
}

/// Tie-adjusted AUC via the Mann-Whitney rank statistic.
fn auc_rank(scores: &[f64], truth: &[Label], positive: Label) -> f64 {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // midrank for the tie group spanning sorted positions i..j
        let midrank = (i + 1 + j) as f64 / 2.0;
        for k in i..j {
            ranks[order[k]] = midrank;
        }
        i = j;
    }
    let n_pos = truth.iter().filter(|&&l| l == positive).count() as f64;
    let n_neg = n as f64 - n_pos;
    let rank_sum: f64 = (0..n)
        .filter(|&k| truth[k] == positive)
        .map(|k| ranks[k])
        .sum();
    (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)
}

/// Evaluate predictions against ground truth. `scores` are positive-class
/// scores used for the ROC sweep and AUC; when the truth contains a single
/// class those fields are omitted.
pub fn evaluate(
    predicted: &[Label],
    scores: &[f64],
    truth: &[Label],
    positive_class: Label,
) -> Result<EvalReport> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::TooFewRows { need: 1, got: 0 });
    }
    let mut confusion = [[0u64; 2]; 2];
    for (p, t) in predicted.iter().zip(truth) {
        let pi = usize::from(*p != positive_class);
        let ti = usize::from(*t != positive_class);
        confusion[pi][ti] += 1;
    }
    let mut report = evaluate_confusion(confusion, positive_class);
    let single_class = truth.iter().all(|&l| l == truth[0]);
    if !single_class {
        report.roc_points = roc_curve(scores, truth, positive_class);
        report.auc = Some(auc_rank(scores, truth, positive_class));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TOL4: f64 = 0.5e-4;

    #[test]
    fn reference_confusion_matrix_statistics() {
        let r = evaluate_confusion([[234, 13], [13, 232]], Label::Organic);
        assert!((r.accuracy - 0.9472).abs() < TOL4, "{}", r.accuracy);
        assert!((r.accuracy_ci_low - 0.9235).abs() < TOL4, "{}", r.accuracy_ci_low);
        assert!((r.accuracy_ci_high - 0.9652).abs() < TOL4, "{}", r.accuracy_ci_high);
        assert!((r.nir - 0.502).abs() < 0.5e-3, "{}", r.nir);
        assert!(r.acc_vs_nir_pvalue < 2e-16, "{}", r.acc_vs_nir_pvalue);
        assert!((r.kappa - 0.8943).abs() < TOL4, "{}", r.kappa);
        assert_abs_diff_eq!(r.mcnemar_pvalue, 1.0);
        assert!((r.sensitivity - 0.9474).abs() < TOL4);
        assert!((r.specificity - 0.9469).abs() < TOL4);
        assert!((r.ppv - 0.9474).abs() < TOL4);
        assert!((r.npv - 0.9469).abs() < TOL4);
        assert!((r.prevalence - 0.5020).abs() < TOL4);
        assert!((r.detection_rate - 0.4756).abs() < TOL4);
        assert!((r.detection_prevalence - 0.5020).abs() < TOL4);
        assert!((r.balanced_accuracy - 0.9472).abs() < TOL4);
    }

    #[test]
    fn perfect_predictions() {
        let truth = vec![Label::Organic, Label::Inorganic, Label::Organic];
        let scores = vec![0.9, 0.1, 0.8];
        let r = evaluate(&truth, &scores, &truth, Label::Organic).unwrap();
        assert_abs_diff_eq!(r.accuracy, 1.0);
        assert_abs_diff_eq!(r.kappa, 1.0);
        assert_abs_diff_eq!(r.auc.unwrap(), 1.0);
        assert_abs_diff_eq!(r.f_score, 1.0);
    }

    #[test]
    fn constant_scores_give_half_auc() {
        let truth = vec![
            Label::Organic,
            Label::Inorganic,
            Label::Organic,
            Label::Inorganic,
        ];
        let predicted = truth.clone();
        let scores = vec![0.5; 4];
        let r = evaluate(&predicted, &scores, &truth, Label::Organic).unwrap();
        assert_abs_diff_eq!(r.auc.unwrap(), 0.5);
    }

    #[test]
    fn single_class_truth_omits_roc() {
        let truth = vec![Label::Organic, Label::Organic];
        let predicted = vec![Label::Organic, Label::Inorganic];
        let r = evaluate(&predicted, &[0.9, 0.2], &truth, Label::Organic).unwrap();
        assert!(r.auc.is_none());
        assert!(r.roc_points.is_empty());
    }

    #[test]
    fn auc_matches_pairwise_oracle() {
        use crate::rng::stream_rng;
        use rand::Rng;
        let mut rng = stream_rng(3, 40);
        for _ in 0..10 {
            let n = rng.gen_range(5..60);
            let truth: Vec<Label> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        Label::Organic
                    } else {
                        Label::Inorganic
                    }
                })
                .collect();
            if truth.iter().all(|&l| l == truth[0]) {
                continue;
            }
            // quantized scores force ties
            let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
            let got = auc_rank(&scores, &truth, Label::Organic);
            // oracle: pairwise wins plus half-ties
            let mut wins = 0.0;
            let mut pairs = 0.0;
            for i in 0..n {
                if truth[i] != Label::Organic {
                    continue;
                }
                for j in 0..n {
                    if truth[j] != Label::Inorganic {
                        continue;
                    }
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
            let want = wins / pairs;
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn roc_is_monotone_and_spans_unit_box() {
        let truth = vec![
            Label::Organic,
            Label::Organic,
            Label::Inorganic,
            Label::Organic,
            Label::Inorganic,
        ];
        let scores = vec![0.9, 0.8, 0.7, 0.6, 0.2];
        let predicted = truth.clone();
        let r = evaluate(&predicted, &scores, &truth, Label::Organic).unwrap();
        assert_eq!(r.roc_points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.roc_points.last(), Some(&(1.0, 1.0)));
        for w in r.roc_points.windows(2) {
            assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn mcnemar_small_cases() {
        // asymmetric discordant counts push the p-value below 1
        assert!(mcnemar_exact(9, 1) < 0.05);
        assert_abs_diff_eq!(mcnemar_exact(0, 0), 1.0);
        assert_abs_diff_eq!(mcnemar_exact(3, 3), 1.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        let truth = vec![Label::Organic];
        assert!(matches!(
            evaluate(&[], &[], &truth, Label::Organic),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
