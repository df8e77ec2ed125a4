//! Leave-one-feature-out accuracy ranking.
//!
//! Each feature's accuracy score is the drop in held-out accuracy when the
//! classifier is retrained without it, normalized so the scores sum to 100.
//! When the total drop is not positive the normalization is undefined; the
//! report flags that and keeps the raw deltas.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::parallel::map_range;

/// A label predictor produced by some training routine.
pub trait LabelPredictor: Send {
    fn predict_label(&self, row: &[f64]) -> Result<Label>;
}

impl LabelPredictor for crate::svm::SvmModel {
    fn predict_label(&self, row: &[f64]) -> Result<Label> {
        self.predict(row)
    }
}

impl LabelPredictor for crate::kmeans::KMeansModel {
    fn predict_label(&self, row: &[f64]) -> Result<Label> {
        self.predict(row)
    }
}

/// Per-feature importance entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    /// Held-out accuracy of the model retrained without this feature.
    pub accuracy_without: f64,
    /// Normalized accuracy score; raw accuracy delta when the report is
    /// degenerate.
    pub accuracy_score: f64,
}

/// Leave-one-feature-out report, sorted by accuracy score descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub baseline_accuracy: f64,
    pub per_feature: Vec<FeatureImportance>,
    /// True when the accuracy drops summed to <= 0 and the scores are raw
    /// deltas instead of percentages.
    pub degenerate: bool,
}

fn holdout_accuracy<M: LabelPredictor>(
    model: &M,
    eval: &FeatureMatrix,
    eval_labels: &[Label],
) -> Result<f64> {
    let mut correct = 0usize;
    for (row, &truth) in eval.values.iter().zip(eval_labels) {
        if model.predict_label(row)? == truth {
            correct += 1;
        }
    }
    Ok(correct as f64 / eval_labels.len() as f64)
}

/// Rank features by retraining without each one. `trainer` must be
/// deterministic given the matrix and seed; retrains run independently and
/// may execute in parallel.
pub fn accuracy_scores<M, F>(
    trainer: F,
    train: &FeatureMatrix,
    eval: &FeatureMatrix,
    seed: u64,
) -> Result<ImportanceReport>
where
    M: LabelPredictor,
    F: Fn(&FeatureMatrix, u64) -> Result<M> + Sync + Send,
{
    let d = train.n_cols();
    if d < 2 {
        return Err(Error::SingleFeature);
    }
    if train.feature_names != eval.feature_names {
        return Err(Error::FeatureNameMismatch(
            "train and eval matrices disagree".into(),
        ));
    }
    let eval_labels = eval.labels_required()?;

    let baseline_model = trainer(train, seed)?;
    let baseline_accuracy = holdout_accuracy(&baseline_model, eval, &eval_labels)?;

    let results = map_range(d, |j| -> Result<(String, f64)> {
        let reduced_train = train.drop_column(j);
        let reduced_eval = eval.drop_column(j);
        let model = trainer(&reduced_train, seed)?;
        let acc = holdout_accuracy(&model, &reduced_eval, &eval_labels)?;
        Ok((train.feature_names[j].clone(), acc))
    });

    let mut deltas = Vec::with_capacity(d);
    for r in results {
        let (name, acc) = r?;
        deltas.push((name, acc, baseline_accuracy - acc));
    }
    let total: f64 = deltas.iter().map(|(_, _, delta)| delta).sum();
    let degenerate = total <= 0.0;
    let mut per_feature: Vec<FeatureImportance> = deltas
        .into_iter()
        .map(|(feature, accuracy_without, delta)| FeatureImportance {
            feature,
            accuracy_without,
            accuracy_score: if degenerate {
                delta
            } else {
                100.0 * delta / total
            },
        })
        .collect();
    per_feature.sort_by(|a, b| {
        b.accuracy_score
            .partial_cmp(&a.accuracy_score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.feature.cmp(&b.feature))
    });
    Ok(ImportanceReport {
        baseline_accuracy,
        per_feature,
        degenerate,
    })
}
