//! Shared helpers for the integration suites.

use std::path::Path;

use botsentinel::corpus::{split_dataset, Label, UserHistory};
use botsentinel::features::{apply_standardization, column_stats, select_by_vif, FeatureMatrix};
use botsentinel::pipeline::{extract_features, split_rows, SplitRows};
use botsentinel::semantic::{load_lexicons, SentimentLexicon};

pub fn lexicons() -> [SentimentLexicon; 3] {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../lexicons");
    load_lexicons([
        &root.join("demo_afinn.tsv"),
        &root.join("demo_bing.tsv"),
        &root.join("demo_nrc.tsv"),
    ])
    .expect("bundled lexicons load")
}

/// Extracted matrix plus split rows and the VIF-selected, standardized view
/// used by several suites.
pub struct Prepared {
    pub matrix: FeatureMatrix,
    pub selected_std: FeatureMatrix,
    pub retained: Vec<String>,
    pub rows: SplitRows,
}

/// Extract features, split, select by VIF on the standardized training
/// rows, and return the standardized selected matrix over all rows.
pub fn prepare(
    corpus: &[UserHistory],
    fractions: (f64, f64, f64),
    seed: u64,
    vif_threshold: f64,
) -> Prepared {
    let report = extract_features(corpus, &lexicons(), 10_800).expect("extraction");
    let split = split_dataset(corpus, fractions, seed).expect("split");
    let rows = split_rows(&report.matrix, &split);

    let stats = column_stats(&report.matrix, &rows.train);
    let mut std_all = report.matrix.clone();
    apply_standardization(&mut std_all, &stats);
    let vif_report = select_by_vif(&std_all, &rows.train, vif_threshold).expect("vif");

    let selected = report.matrix.select_columns(&vif_report.retained).expect("columns");
    let sel_stats = column_stats(&selected, &rows.train);
    let mut selected_std = selected;
    apply_standardization(&mut selected_std, &sel_stats);

    Prepared {
        matrix: report.matrix,
        selected_std,
        retained: vif_report.retained,
        rows,
    }
}

pub fn labels_of(matrix: &FeatureMatrix, rows: &[usize]) -> Vec<Label> {
    rows.iter()
        .map(|&i| matrix.labels[i].expect("labeled row"))
        .collect()
}
