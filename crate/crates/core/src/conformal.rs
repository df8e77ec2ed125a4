//! Split conformal prediction over any probabilistic binary classifier.
//!
//! Nonconformity of an example is one minus the model probability of its
//! label. Calibration sorts the nonconformity scores of a held-out split;
//! a test label's p-value is `(#{calibration scores >= s} + 1) / (n + 1)`,
//! and the prediction set keeps every label whose p-value exceeds alpha.
//! Sets may be empty or contain both labels; both outcomes are reported.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Classifier interface needed by conformal prediction: a probability for
/// a given label on a given row.
pub trait ProbClassifier {
    fn prob(&self, row: &[f64], label: Label) -> Result<f64>;
}

impl ProbClassifier for crate::svm::SvmModel {
    fn prob(&self, row: &[f64], label: Label) -> Result<f64> {
        self.proba(row, label)
    }
}

/// Nonconformity score `1 - p` of a label probability.
pub fn nonconformity(proba_of_label: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&proba_of_label) || !proba_of_label.is_finite() {
        return Err(Error::BadProbability(proba_of_label));
    }
    Ok(1.0 - proba_of_label)
}

/// Sorted calibration nonconformity scores plus the significance level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalCalibration {
    /// Ascending nonconformity scores of the calibration examples.
    pub scores: Vec<f64>,
    pub alpha: f64,
}

impl ConformalCalibration {
    /// Build a calibration object from precomputed nonconformity scores.
    pub fn from_scores(mut scores: Vec<f64>, alpha: f64) -> Result<ConformalCalibration> {
        if scores.is_empty() {
            return Err(Error::EmptyCalibration);
        }
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(ConformalCalibration { scores, alpha })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Conformal p-value of a test nonconformity score; ties count as
    /// "greater or equal". Output lies in `[1/(n+1), 1]`.
    pub fn p_value(&self, test_score: f64) -> f64 {
        let n = self.scores.len();
        // first index with score >= test_score
        let idx = self.scores.partition_point(|s| *s < test_score);
        let count_ge = n - idx;
        (count_ge + 1) as f64 / (n + 1) as f64
    }
}

/// Calibrate on a held-out split: scores are the nonconformity of each
/// example's true label under the model.
pub fn calibrate<M: ProbClassifier>(
    model: &M,
    calib_rows: &[Vec<f64>],
    calib_labels: &[Label],
    alpha: f64,
) -> Result<ConformalCalibration> {
    if calib_rows.len() != calib_labels.len() {
        return Err(Error::LengthMismatch {
            left: calib_rows.len(),
            right: calib_labels.len(),
        });
    }
    let scores = calib_rows
        .iter()
        .zip(calib_labels)
        .map(|(row, &label)| nonconformity(model.prob(row, label)?))
        .collect::<Result<Vec<f64>>>()?;
    ConformalCalibration::from_scores(scores, alpha)
}

/// Per-label p-values and the resulting label set for one test row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub p_organic: f64,
    pub p_inorganic: f64,
    /// Labels with p-value above alpha; possibly empty, possibly both.
    pub members: Vec<Label>,
    pub alpha: f64,
}

impl PredictionSet {
    pub fn contains(&self, label: Label) -> bool {
        self.members.contains(&label)
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn p_value(&self, label: Label) -> f64 {
        match label {
            Label::Organic => self.p_organic,
            Label::Inorganic => self.p_inorganic,
        }
    }

    /// Single forced label: the argmax p-value, ties to the positive
    /// (organic) class.
    pub fn forced_label(&self) -> Label {
        if self.p_organic >= self.p_inorganic {
            Label::Organic
        } else {
            Label::Inorganic
        }
    }
}

/// Build the prediction set for one row.
pub fn prediction_set<M: ProbClassifier>(
    model: &M,
    row: &[f64],
    calib: &ConformalCalibration,
) -> Result<PredictionSet> {
    let p_organic = calib.p_value(nonconformity(model.prob(row, Label::Organic)?)?);
    let p_inorganic = calib.p_value(nonconformity(model.prob(row, Label::Inorganic)?)?);
    let mut members = Vec::with_capacity(2);
    if p_organic > calib.alpha {
        members.push(Label::Organic);
    }
    if p_inorganic > calib.alpha {
        members.push(Label::Inorganic);
    }
    Ok(PredictionSet {
        p_organic,
        p_inorganic,
        members,
        alpha: calib.alpha,
    })
}

/// Aggregate validity and efficiency diagnostics over a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Fraction of prediction sets containing the true label.
    pub empirical_coverage: f64,
    pub mean_set_size: f64,
    /// Counts of sets with size 0, 1, 2.
    pub size_histogram: [u64; 3],
    /// True-label p-values binned into ten equal bins over [0, 1].
    pub pvalue_histogram: [u64; 10],
}

/// Summarize prediction sets against the true labels.
pub fn coverage_report(sets: &[PredictionSet], truths: &[Label]) -> Result<CoverageReport> {
    if sets.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: sets.len(),
            right: truths.len(),
        });
    }
    if sets.is_empty() {
        return Err(Error::TooFewRows { need: 1, got: 0 });
    }
    let n = sets.len() as f64;
    let mut covered = 0u64;
    let mut size_histogram = [0u64; 3];
    let mut pvalue_histogram = [0u64; 10];
    let mut total_size = 0u64;
    for (set, &truth) in sets.iter().zip(truths) {
        if set.contains(truth) {
            covered += 1;
        }
        let size = set.size();
        size_histogram[size] += 1;
        total_size += size as u64;
        let p = set.p_value(truth);
        let bin = ((p * 10.0).floor() as usize).min(9);
        pvalue_histogram[bin] += 1;
    }
    Ok(CoverageReport {
        empirical_coverage: covered as f64 / n,
        mean_set_size: total_size as f64 / n,
        size_histogram,
        pvalue_histogram,
    })
}
