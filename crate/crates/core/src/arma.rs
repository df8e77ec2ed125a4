//! ARMA model fitting on inter-tweet intervals.
//!
//! Candidates over an order grid are fit by conditional-sum-of-squares
//! minimization of the mean-centered series, then ranked by AIC. Residual
//! recursions condition on a fixed presample of `max_p` points so every grid
//! candidate is scored on the same effective sample. Intervals are already a
//! first difference of timestamps, so no further differencing is applied.

use crate::error::{Error, Result};
use crate::linalg::{lstsq_qr, solve_spd};

/// Sentinel log-likelihood for a perfect (zero residual variance) fit.
pub const LOGLIK_CAP: f64 = 1e12;

/// A fitted ARMA(p, q) model and its fit statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaFit {
    pub p: usize,
    pub q: usize,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    /// Residual variance of the conditional-sum-of-squares fit.
    pub sigma2: f64,
    /// Gaussian log-likelihood -(n/2)(ln(2*pi*sigma2) + 1) over the
    /// conditioned sample, capped at [`LOGLIK_CAP`] when sigma2 is 0.
    pub loglik: f64,
    /// Number of estimated terms: p + q + 1 (innovation variance included).
    pub fit_length: usize,
    pub aic: f64,
}

impl ArimaFit {
    pub fn sumsq_ar(&self) -> f64 {
        self.ar_coeffs.iter().map(|c| c * c).sum()
    }
}

/// Conditional sum of squared residuals with presample cutoff `m`.
/// Residuals before `m` are treated as zero and excluded from the sum.
fn css_rss(x: &[f64], phi: &[f64], theta: &[f64], m: usize) -> f64 {
    let n = x.len();
    let mut eps = vec![0.0; n];
    let mut rss = 0.0;
    for t in m..n {
        let mut pred = 0.0;
        for (k, &ph) in phi.iter().enumerate() {
            pred += ph * x[t - 1 - k];
        }
        for (k, &th) in theta.iter().enumerate() {
            if t >= k + 1 {
                pred += th * eps[t - 1 - k];
            }
        }
        let e = x[t] - pred;
        eps[t] = e;
        rss += e * e;
    }
    rss
}

fn loglik_from_rss(rss: f64, n_eff: usize) -> (f64, f64) {
    let sigma2 = rss / n_eff as f64;
    if sigma2 < 1e-300 {
        return (0.0, LOGLIK_CAP);
    }
    let ll = -(n_eff as f64 / 2.0) * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    (sigma2, ll)
}

/// Exact CSS minimizer for a pure AR(p): ordinary least squares of x_t on
/// its p lags over t = m..n. Returns `None` on a singular design.
fn fit_ar_ols(x: &[f64], p: usize, m: usize) -> Option<Vec<f64>> {
    let n = x.len();
    let rows = n - m;
    if rows <= p {
        return None;
    }
    // normal equations: (X^T X) phi = X^T y
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for t in m..n {
        for i in 0..p {
            xty[i] += x[t - 1 - i] * x[t];
            for j in 0..=i {
                xtx[i * p + j] += x[t - 1 - i] * x[t - 1 - j];
            }
        }
    }
    for i in 0..p {
        for j in (i + 1)..p {
            xtx[i * p + j] = xtx[j * p + i];
        }
    }
    solve_spd(&xtx, &xty, p)
}

/// Hannan-Rissanen start values: a long AR fit supplies residual proxies,
/// then one OLS pass regresses x_t on its own lags and lagged residuals.
fn hannan_rissanen(x: &[f64], p: usize, q: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let h = (n / 4).clamp(p + q + 1, 12);
    let long = fit_ar_ols(x, h, h)?;
    let mut eps = vec![0.0; n];
    for t in h..n {
        let mut pred = 0.0;
        for (k, &ph) in long.iter().enumerate() {
            pred += ph * x[t - 1 - k];
        }
        eps[t] = x[t] - pred;
    }
    let start = h + q;
    let rows = n.checked_sub(start)?;
    let cols = p + q;
    if rows <= cols {
        return None;
    }
    let mut design = Vec::with_capacity(rows * cols);
    let mut y = Vec::with_capacity(rows);
    for t in start..n {
        for k in 0..p {
            design.push(x[t - 1 - k]);
        }
        for k in 0..q {
            design.push(eps[t - 1 - k]);
        }
        y.push(x[t]);
    }
    let beta = lstsq_qr(&design, &y, rows, cols)?;
    let phi = beta[..p].to_vec();
    let theta = beta[p..].to_vec();
    Some((phi, theta))
}

/// Derivative-free Nelder-Mead minimization. Deterministic for a fixed
/// starting point; good enough for the <= 6 coefficients handled here.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, max_iter: usize) -> Vec<f64> {
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-8 { step * v[i].abs() } else { step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let (best, worst, second_worst) = (order[0], order[dim], order[dim - 1]);
        if (values[worst] - values[best]).abs()
            <= 1e-12 * (values[best].abs() + 1e-12)
        {
            break;
        }
        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for (c, s) in centroid.iter_mut().zip(&simplex[i]) {
                *c += s / dim as f64;
            }
        }
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(c, w)| c + (c - w))
            .collect();
        let f_reflect = f(&reflect);
        if f_reflect < values[best] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                values[worst] = f_reflect;
            }
        } else if f_reflect < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect();
            let f_contract = f(&contract);
            if f_contract < values[worst] {
                simplex[worst] = contract;
                values[worst] = f_contract;
            } else {
                // shrink toward the best vertex
                let best_point = simplex[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    for (s, b) in simplex[i].iter_mut().zip(&best_point) {
                        *s = b + 0.5 * (*s - b);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let arg = (0..=dim)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    simplex.swap_remove(arg)
}

fn fit_candidate(centered: &[f64], p: usize, q: usize, m: usize) -> Option<ArimaFit> {
    let n_eff = centered.len() - m;
    let (phi, theta, rss) = if p == 0 && q == 0 {
        let rss = css_rss(centered, &[], &[], m);
        (Vec::new(), Vec::new(), rss)
    } else if q == 0 {
        let phi = fit_ar_ols(centered, p, m)?;
        let rss = css_rss(centered, &phi, &[], m);
        (phi, Vec::new(), rss)
    } else {
        let objective = |params: &[f64]| {
            let rss = css_rss(centered, &params[..p], &params[p..], m);
            if rss.is_finite() {
                rss
            } else {
                f64::MAX
            }
        };
        let zero_start = vec![0.0; p + q];
        let mut best = nelder_mead(&objective, &zero_start, 0.25, 200);
        let mut best_rss = objective(&best);
        if let Some((phi0, theta0)) = hannan_rissanen(centered, p, q) {
            let mut start: Vec<f64> = phi0;
            start.extend(theta0);
            if start.iter().all(|v| v.is_finite()) {
                let cand = nelder_mead(&objective, &start, 0.1, 200);
                let cand_rss = objective(&cand);
                if cand_rss < best_rss {
                    best = cand;
                    best_rss = cand_rss;
                }
            }
        }
        let phi = best[..p].to_vec();
        let theta = best[p..].to_vec();
        (phi, theta, best_rss)
    };
    if !rss.is_finite() {
        return None;
    }
    let (sigma2, loglik) = loglik_from_rss(rss, n_eff);
    let fit_length = p + q + 1;
    let aic = -2.0 * loglik + 2.0 * fit_length as f64;
    Some(ArimaFit {
        p,
        q,
        ar_coeffs: phi,
        ma_coeffs: theta,
        sigma2,
        loglik,
        fit_length,
        aic,
    })
}

/// Fit every ARMA(p, q) candidate on the grid `[0..=max_p] x [0..=max_q]`
/// and return the ones that converged, in grid order.
pub fn fit_arima_grid(x: &[f64], max_p: usize, max_q: usize) -> Result<Vec<ArimaFit>> {
    if x.len() < 20 {
        return Err(Error::SeriesTooShort {
            need: 20,
            got: x.len(),
        });
    }
    if max_p > 3 || max_q > 3 {
        return Err(Error::InvalidParameter(format!(
            "ARMA orders limited to 3, got max_p={max_p} max_q={max_q}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let m = max_p;
    let mut fits = Vec::new();
    for p in 0..=max_p {
        for q in 0..=max_q {
            if let Some(fit) = fit_candidate(&centered, p, q, m) {
                fits.push(fit);
            }
        }
    }
    if fits.is_empty() {
        return Err(Error::ArimaNoFit);
    }
    Ok(fits)
}

/// Grid-search ARMA fit selected by minimum AIC (earliest candidate wins
/// ties). Requires at least 20 observations.
pub fn fit_arima(x: &[f64], max_p: usize, max_q: usize) -> Result<ArimaFit> {
    let fits = fit_arima_grid(x, max_p, max_q)?;
    Ok(fits
        .into_iter()
        .min_by(|a, b| a.aic.partial_cmp(&b.aic).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap())
}
