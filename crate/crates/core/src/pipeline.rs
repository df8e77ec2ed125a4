//! Corpus-to-matrix extraction and shared train/evaluate helpers.

use std::collections::BTreeMap;

use crate::corpus::{DatasetSplit, UserHistory};
use crate::error::Result;
use crate::features::{
    apply_standardization, assemble_matrix, ColumnStats, FeatureMatrix,
};
use crate::importance::LabelPredictor;
use crate::semantic::{semantic_features, SemanticFeatures, SentimentLexicon};
use crate::temporal::{temporal_features_with, TemporalFeatures};
use crate::corpus::Label;

/// Extraction output: the assembled matrix plus the users that had to be
/// excluded (too few tweets or bins, no words) with the reason for each.
#[derive(Debug, Clone)]
pub struct ExtractionReport {
    pub matrix: FeatureMatrix,
    pub excluded: Vec<(String, String)>,
}

type PerUser = std::result::Result<(String, TemporalFeatures, SemanticFeatures), (String, String)>;

fn extract_user(
    user: &UserHistory,
    lexicons: &[SentimentLexicon; 3],
    bin_width: i64,
) -> PerUser {
    let temporal = temporal_features_with(user, bin_width)
        .map_err(|e| (user.user_id.clone(), e.to_string()))?;
    let semantic = semantic_features(user, lexicons)
        .map_err(|e| (user.user_id.clone(), e.to_string()))?;
    Ok((user.user_id.clone(), temporal, semantic))
}

fn collect_extraction(
    corpus: &[UserHistory],
    results: Vec<PerUser>,
) -> Result<ExtractionReport> {
    let mut temporal = BTreeMap::new();
    let mut semantic = BTreeMap::new();
    let mut labels = BTreeMap::new();
    let mut excluded = Vec::new();
    let by_id: BTreeMap<&str, &UserHistory> =
        corpus.iter().map(|u| (u.user_id.as_str(), u)).collect();
    for r in results {
        match r {
            Ok((id, t, s)) => {
                labels.insert(id.clone(), by_id[id.as_str()].label);
                temporal.insert(id.clone(), t);
                semantic.insert(id, s);
            }
            Err(reason) => excluded.push(reason),
        }
    }
    excluded.sort();
    let matrix = assemble_matrix(&temporal, &semantic, &labels)?;
    Ok(ExtractionReport { matrix, excluded })
}

/// Extract the canonical feature matrix for a corpus. Runs per user on the
/// parallel map when the `parallel` feature is on.
pub fn extract_features(
    corpus: &[UserHistory],
    lexicons: &[SentimentLexicon; 3],
    bin_width: i64,
) -> Result<ExtractionReport> {
    let results = crate::parallel::map_slice(corpus, |u| extract_user(u, lexicons, bin_width));
    collect_extraction(corpus, results)
}

/// Always-sequential [`extract_features`], kept for benchmarking.
pub fn extract_features_seq(
    corpus: &[UserHistory],
    lexicons: &[SentimentLexicon; 3],
    bin_width: i64,
) -> Result<ExtractionReport> {
    let results = crate::parallel::map_slice_seq(corpus, |u| extract_user(u, lexicons, bin_width));
    collect_extraction(corpus, results)
}

/// Row indices of a matrix grouped by dataset split membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRows {
    pub train: Vec<usize>,
    pub calibration: Vec<usize>,
    pub test: Vec<usize>,
}

/// Group matrix rows by a dataset split. Users missing from the split
/// (for example excluded during extraction elsewhere) are ignored.
pub fn split_rows(matrix: &FeatureMatrix, split: &DatasetSplit) -> SplitRows {
    let mut rows = SplitRows {
        train: Vec::new(),
        calibration: Vec::new(),
        test: Vec::new(),
    };
    for (i, id) in matrix.user_ids.iter().enumerate() {
        if split.train.contains(id) {
            rows.train.push(i);
        } else if split.calibration.contains(id) {
            rows.calibration.push(i);
        } else if split.test.contains(id) {
            rows.test.push(i);
        }
    }
    rows
}

/// A model fitted on standardized data bundled with the statistics needed
/// to standardize raw rows at prediction time.
pub struct StandardizedModel<M> {
    pub stats: Vec<ColumnStats>,
    pub model: M,
}

impl<M: LabelPredictor> LabelPredictor for StandardizedModel<M> {
    fn predict_label(&self, row: &[f64]) -> Result<Label> {
        let std_row: Vec<f64> = row
            .iter()
            .zip(&self.stats)
            .map(|(v, s)| if s.is_constant() { 0.0 } else { (v - s.mean) / s.sd })
            .collect();
        self.model.predict_label(&std_row)
    }
}

/// Trainer closure for leave-one-feature-out importance: standardizes on
/// its own rows, fits an SVM, and returns a predictor usable on raw rows.
pub fn svm_trainer(
    c: f64,
    kernel: crate::svm::KernelSpec,
) -> impl Fn(&FeatureMatrix, u64) -> Result<StandardizedModel<crate::svm::SvmModel>> + Sync + Send
{
    move |matrix, seed| {
        let rows: Vec<usize> = (0..matrix.n_rows()).collect();
        let mut std_matrix = matrix.clone();
        let stats = crate::features::column_stats(matrix, &rows);
        apply_standardization(&mut std_matrix, &stats);
        let model = crate::svm::svm_fit(&std_matrix, c, kernel, seed)?;
        Ok(StandardizedModel { stats, model })
    }
}

/// Trainer closure fitting a majority-mapped k-means.
pub fn kmeans_trainer(
    restarts: usize,
) -> impl Fn(&FeatureMatrix, u64) -> Result<StandardizedModel<crate::kmeans::KMeansModel>> + Sync + Send
{
    move |matrix, seed| {
        let rows: Vec<usize> = (0..matrix.n_rows()).collect();
        let mut std_matrix = matrix.clone();
        let stats = crate::features::column_stats(matrix, &rows);
        apply_standardization(&mut std_matrix, &stats);
        let model = crate::kmeans::kmeans_fit(&std_matrix, seed, restarts)?;
        Ok(StandardizedModel { stats, model })
    }
}
