//! Power spectrum of a binned activity series.
//!
//! The periodogram is the squared modulus of the discrete Fourier transform
//! of the mean-centered counts, evaluated at the Fourier frequencies
//! `k / n` for `k = 1 ..= n/2` (cycles per bin). A daily posting cycle at
//! 3-hour bins shows up as a peak at frequency 1/8.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::corpus::BinnedSeries;
use crate::error::{Error, Result};

/// Periodogram over the positive Fourier frequencies, zero excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    /// Frequencies in cycles per bin, strictly increasing, within (0, 0.5].
    pub frequencies: Vec<f64>,
    /// Squared DFT modulus at each frequency, nonnegative.
    pub powers: Vec<f64>,
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// Compute the periodogram of a binned series. Requires at least 4 bins.
pub fn periodogram(series: &BinnedSeries) -> Result<Periodogram> {
    let n = series.counts.len();
    if n < 4 {
        return Err(Error::SeriesTooShort { need: 4, got: n });
    }
    let mean = series.counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = series
        .counts
        .iter()
        .map(|&c| Complex::new(c as f64 - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let mut frequencies = Vec::with_capacity(half);
    let mut powers = Vec::with_capacity(half);
    for k in 1..=half {
        frequencies.push(k as f64 / n as f64);
        powers.push(buf[k].norm_sqr());
    }
    Ok(Periodogram {
        frequencies,
        powers,
    })
}

/// Reciprocal of the highest-power frequency, in bins per cycle. Ties go to
/// the lowest frequency; an all-zero spectrum returns the sentinel 0.
pub fn dominant_periodicity(pgram: &Periodogram) -> f64 {
    let mut best = 0usize;
    let mut best_power = 0.0f64;
    for (j, &p) in pgram.powers.iter().enumerate() {
        if p > best_power {
            best_power = p;
            best = j;
        }
    }
    if best_power > 0.0 {
        1.0 / pgram.frequencies[best]
    } else {
        0.0
    }
}

/// Count periodogram local maxima and the power ratio of the two largest.
///
/// An index is a local maximum when it strictly exceeds its left neighbor,
/// weakly exceeds its right neighbor, and exceeds the mean power. The ratio
/// is second-largest over largest maximum power, 0 with fewer than two.
pub fn local_maxima(pgram: &Periodogram) -> Result<(usize, f64)> {
    let n = pgram.len();
    if n < 3 {
        return Err(Error::SeriesTooShort { need: 3, got: n });
    }
    let mean = pgram.powers.iter().sum::<f64>() / n as f64;
    let mut maxima = Vec::new();
    for j in 1..n - 1 {
        let p = pgram.powers[j];
        if p > pgram.powers[j - 1] && p >= pgram.powers[j + 1] && p > mean {
            maxima.push(p);
        }
    }
    let count = maxima.len();
    if count < 2 {
        return Ok((count, 0.0));
    }
    maxima.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((count, maxima[1] / maxima[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(counts: Vec<u32>) -> BinnedSeries {
        BinnedSeries {
            start: 0,
            bin_width: 10_800,
            counts,
        }
    }

    /// Independent O(n^2) DFT oracle.
    fn dft_powers(counts: &[u32]) -> Vec<f64> {
        let n = counts.len();
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
        let x: Vec<f64> = counts.iter().map(|&c| c as f64 - mean).collect();
        (1..=n / 2)
            .map(|k| {
                let omega = k as f64 / n as f64;
                let (mut re, mut im) = (0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let phi = -2.0 * std::f64::consts::PI * omega * t as f64;
                    re += v * phi.cos();
                    im += v * phi.sin();
                }
                re * re + im * im
            })
            .collect()
    }

    fn cosine_counts(period: f64, n: usize, amp: f64, base: f64) -> Vec<u32> {
        (0..n)
            .map(|t| {
                (base + amp * (2.0 * std::f64::consts::PI * t as f64 / period).cos()).round()
                    as u32
            })
            .collect()
    }

    #[test]
    fn constant_series_has_zero_power() {
        let p = periodogram(&series(vec![3; 8])).unwrap();
        assert!(p.powers.iter().all(|&v| v == 0.0));
        assert_eq!(dominant_periodicity(&p), 0.0);
    }

    #[test]
    fn cosine_period_8_peaks_at_one_eighth() {
        // counts = cos(2*pi*t/8) sampled at t=0..15, shifted positive
        let counts = cosine_counts(8.0, 16, 2.0, 3.0);
        let p = periodogram(&series(counts.clone())).unwrap();
        let oracle = dft_powers(&counts);
        let scale = oracle.iter().cloned().fold(0.0, f64::max);
        for (a, b) in p.powers.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9 * scale.max(1.0), "{a} vs {b}");
        }
        let arg = p
            .powers
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_abs_diff_eq!(p.frequencies[arg], 1.0 / 8.0);
        assert_eq!(dominant_periodicity(&p), 8.0);
    }

    #[test]
    fn alternation_peaks_at_nyquist() {
        let p = periodogram(&series(vec![1, 0, 1, 0, 1, 0, 1, 0])).unwrap();
        let arg = p
            .powers
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_abs_diff_eq!(p.frequencies[arg], 0.5);
    }

    #[test]
    fn pure_period_four_is_exact() {
        // exactness on pure sinusoids whose period divides n
        for n in [12usize, 16, 24, 40] {
            let p4 = periodogram(&series(cosine_counts(4.0, n, 2.0, 3.0))).unwrap();
            assert_eq!(dominant_periodicity(&p4), 4.0, "n={n}");
            if n % 8 == 0 {
                let p8 = periodogram(&series(cosine_counts(8.0, n, 2.0, 3.0))).unwrap();
                assert_eq!(dominant_periodicity(&p8), 8.0, "n={n}");
            }
        }
    }

    #[test]
    fn too_short_series_rejected() {
        assert!(periodogram(&series(vec![1, 2, 3])).is_err());
    }

    #[test]
    fn single_spike_counts_one_maximum() {
        let pg = Periodogram {
            frequencies: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            powers: vec![0.0, 10.0, 0.0, 0.0, 0.0],
        };
        assert_eq!(local_maxima(&pg).unwrap(), (1, 0.0));
    }

    #[test]
    fn two_equal_spikes_ratio_one() {
        let pg = Periodogram {
            frequencies: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            powers: vec![0.0, 8.0, 0.0, 8.0, 0.0],
        };
        let (count, ratio) = local_maxima(&pg).unwrap();
        assert_eq!(count, 2);
        assert_abs_diff_eq!(ratio, 1.0);
    }

    #[test]
    fn mixed_periods_power_ratio_follows_amplitude_squared() {
        // period-8 and period-4 sinusoids with 2:1 amplitudes -> ratio 1/4
        let n = 32;
        let counts: Vec<u32> = (0..n)
            .map(|t| {
                let tau = t as f64;
                let v = 100.0
                    + 40.0 * (2.0 * std::f64::consts::PI * tau / 8.0).cos()
                    + 20.0 * (2.0 * std::f64::consts::PI * tau / 4.0).cos();
                v.round() as u32
            })
            .collect();
        let p = periodogram(&series(counts)).unwrap();
        let (count, ratio) = local_maxima(&p).unwrap();
        assert_eq!(count, 2);
        assert!((ratio - 0.25).abs() < 0.01, "ratio {ratio}");
        assert_eq!(dominant_periodicity(&p), 8.0);
    }

    #[test]
    fn power_invariant_to_constant_shift_and_scales_quadratically() {
        let base = vec![4u32, 1, 0, 3, 5, 2, 2, 0, 1, 6, 3, 2];
        let p0 = periodogram(&series(base.clone())).unwrap();
        let shifted: Vec<u32> = base.iter().map(|c| c + 7).collect();
        let p1 = periodogram(&series(shifted)).unwrap();
        let scale = p0.powers.iter().cloned().fold(0.0, f64::max);
        for (a, b) in p0.powers.iter().zip(&p1.powers) {
            assert!((a - b).abs() <= 1e-9 * scale.max(1.0));
        }
        let tripled: Vec<u32> = base.iter().map(|c| c * 3).collect();
        let p3 = periodogram(&series(tripled)).unwrap();
        for (a, b) in p0.powers.iter().zip(&p3.powers) {
            assert!((9.0 * a - b).abs() <= 1e-8 * (9.0 * scale).max(1.0));
        }
        assert_eq!(dominant_periodicity(&p0), dominant_periodicity(&p3));
        assert_eq!(
            local_maxima(&p0).unwrap().0,
            local_maxima(&p3).unwrap().0
        );
    }
}
