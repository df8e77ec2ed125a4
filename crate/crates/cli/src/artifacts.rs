//! Artifact paths and atomic file writes (temp file + rename, so a crash
//! never leaves a half-written output).

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;

pub fn features_csv(c: &RunConfig) -> PathBuf {
    c.out_dir.join("features.csv")
}

pub fn extract_report(c: &RunConfig) -> PathBuf {
    c.out_dir.join("extract_report.json")
}

pub fn vif_report(c: &RunConfig) -> PathBuf {
    c.out_dir.join("vif_report.json")
}

pub fn selected_csv(c: &RunConfig) -> PathBuf {
    c.out_dir.join("features_selected.csv")
}

pub fn svm_model(c: &RunConfig) -> PathBuf {
    c.out_dir.join("svm.json")
}

pub fn kmeans_model(c: &RunConfig) -> PathBuf {
    c.out_dir.join("kmeans.json")
}

pub fn evaluation(c: &RunConfig) -> PathBuf {
    c.out_dir.join("evaluation.json")
}

pub fn conformal_report(c: &RunConfig) -> PathBuf {
    c.out_dir.join("conformal_report.json")
}

pub fn pvalue_histogram(c: &RunConfig) -> PathBuf {
    c.out_dir.join("pvalue_histogram.csv")
}

pub fn set_size_histogram(c: &RunConfig) -> PathBuf {
    c.out_dir.join("set_size_histogram.csv")
}

pub fn importance_csv(c: &RunConfig, model: &str) -> PathBuf {
    c.out_dir.join(format!("importance_{model}.csv"))
}

pub fn consolidated(c: &RunConfig) -> PathBuf {
    c.out_dir.join("report.json")
}

/// Write bytes atomically: a uniquely named temp file in the target
/// directory is persisted over the destination.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| format!("cannot create '{}': {e}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| format!("cannot create temp file in '{}': {e}", dir.display()))?;
    tmp.write_all(bytes)
        .map_err(|e| format!("cannot write '{}': {e}", path.display()))?;
    tmp.flush()
        .map_err(|e| format!("cannot flush '{}': {e}", path.display()))?;
    tmp.persist(path)
        .map_err(|e| format!("cannot persist '{}': {e}", path.display()))?;
    Ok(())
}

/// Pretty JSON with a trailing newline; key order is struct order, so the
/// bytes are stable across runs.
pub fn to_json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, String> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| format!("JSON encoding failed: {e}"))?;
    bytes.push(b'\n');
    Ok(bytes)
}
