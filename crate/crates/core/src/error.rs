//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by corpus handling, feature extraction, model fitting
/// and report generation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("corpus parse error at line {line}: {message}")]
    CorpusParse { line: usize, message: String },

    #[error("duplicate user id '{0}'")]
    DuplicateUserId(String),

    #[error("user '{user_id}': {message}")]
    InvalidHistory { user_id: String, message: String },

    #[error("series too short: need at least {need} points, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    #[error("non-finite value in input series")]
    NonFiniteInput,

    #[error("no ARMA candidate converged")]
    ArimaNoFit,

    #[error("lexicon '{0}' has no entries")]
    EmptyLexicon(String),

    #[error("lexicon parse error in '{path}' at line {line}: {message}")]
    LexiconParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("zero words across history for user '{0}'")]
    NoWords(String),

    #[error("split fractions must sum to 1 (got {0})")]
    BadFractions(f64),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("user sets differ: {0}")]
    UserSetMismatch(String),

    #[error("feature matrix needs more rows than columns (rows {rows}, cols {cols})")]
    NotEnoughRows { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("feature names do not match model: {0}")]
    FeatureNameMismatch(String),

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("SMO did not converge within {iterations} pair updates")]
    SmoNoConvergence { iterations: usize },

    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("probability out of range: {0}")]
    BadProbability(f64),

    #[error("empty calibration set")]
    EmptyCalibration,

    #[error("leave-one-out importance needs at least 2 features")]
    SingleFeature,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("model file error: {0}")]
    ModelFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
