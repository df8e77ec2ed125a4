//! Bot-detection toolkit for tweet histories.
//!
//! The pipeline extracts temporal features (dominant periodicity, periodogram
//! shape, ARMA interval statistics) and semantic features (lexical diversity,
//! word statistics, hashtag and top-word frequencies, lexicon sentiment) per
//! user, reduces multicollinearity by iterative VIF elimination, classifies
//! accounts as organic or inorganic with k-means and a soft-margin SVM, ranks
//! feature importance by leave-one-feature-out accuracy, and wraps any
//! probabilistic classifier in split conformal prediction sets.
//!
//! The `parallel` feature (on by default) runs the per-user and per-restart
//! inner loops on rayon; outputs are identical with or without it.

pub mod arma;
pub mod conformal;
pub mod corpus;
pub mod error;
pub mod features;
pub mod kmeans;
pub mod importance;
pub mod linalg;
pub mod metrics;
pub mod parallel;
pub mod pipeline;
pub mod rng;
pub mod semantic;
pub mod spectrum;
pub mod svm;
pub mod synthgen;
pub mod temporal;

pub use corpus::{
    bin_series, intervals, load_corpus, save_corpus, split_dataset, BinnedSeries, DatasetSplit,
    Label, Tweet, UserHistory,
};
pub use error::{Error, Result};
