//! Temporal features of a tweet history: dominant periodicity, periodogram
//! shape, and ARMA statistics of the inter-tweet intervals.

use crate::arma::fit_arima;
use crate::corpus::{bin_series, intervals, UserHistory, DEFAULT_BIN_WIDTH};
use crate::error::{Error, Result};
use crate::spectrum::{dominant_periodicity, local_maxima, periodogram};

/// Minimum history length for temporal feature extraction.
pub const MIN_TWEETS: usize = 20;

/// The seven temporal features of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalFeatures {
    /// Bins per cycle of the dominant periodogram frequency; 0 when the
    /// spectrum is flat.
    pub periodicity: f64,
    pub loglik: f64,
    /// Sum of squared AR coefficients.
    pub sumsq_ar: f64,
    /// ARMA residual variance.
    pub error_var: f64,
    /// Number of estimated ARMA terms (p + q + 1).
    pub fit_length: usize,
    pub n_local_maxima: usize,
    /// Power of the second-largest periodogram local maximum relative to
    /// the largest, in [0, 1].
    pub secondary_power_ratio: f64,
}

/// Extract temporal features using the default 3-hour bin width.
pub fn temporal_features(history: &UserHistory) -> Result<TemporalFeatures> {
    temporal_features_with(history, DEFAULT_BIN_WIDTH)
}

/// Extract temporal features with an explicit bin width. Histories shorter
/// than [`MIN_TWEETS`] tweets are rejected and should be excluded from the
/// feature matrix by the caller.
pub fn temporal_features_with(history: &UserHistory, bin_width: i64) -> Result<TemporalFeatures> {
    if history.tweets.len() < MIN_TWEETS {
        return Err(Error::InvalidHistory {
            user_id: history.user_id.clone(),
            message: format!(
                "{} tweets; temporal features need at least {MIN_TWEETS}, exclude this user",
                history.tweets.len()
            ),
        });
    }
    let binned = bin_series(history, bin_width)?;
    let pgram = periodogram(&binned)?;
    let periodicity = dominant_periodicity(&pgram);
    let (n_local_maxima, secondary_power_ratio) = local_maxima(&pgram)?;

    let gaps = intervals(history)?;
    let fit = fit_arima(&gaps, 3, 3)?;

    Ok(TemporalFeatures {
        periodicity,
        loglik: fit.loglik,
        sumsq_ar: fit.sumsq_ar(),
        error_var: fit.sigma2,
        fit_length: fit.fit_length,
        n_local_maxima,
        secondary_power_ratio,
    })
}
