//! Summary statistics for evaluation tables.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::rng_for;

/// Bracket used to present mean expansion counts on a common scale.
pub const NORMALIZE_LO: f64 = 200.0;
pub const NORMALIZE_HI: f64 = 5000.0;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Midpoint median; NaN for an empty slice.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Percentile bootstrap interval for the mean at level `1 - alpha`.
pub fn bootstrap_ci(xs: &[f64], resamples: usize, alpha: f64, seed: u64) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = rng_for(seed, &[0xb007]);
    let n = xs.len();
    let mut means: Vec<f64> = (0..resamples.max(1))
        .map(|_| (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let q = |p: f64| means[((p * (means.len() - 1) as f64).round() as usize).min(means.len() - 1)];
    let m = mean(xs);
    // Percentile bounds can miss the sample mean by rounding on tiny samples.
    (q(alpha / 2.0).min(m), q(1.0 - alpha / 2.0).max(m))
}

/// `clamp((raw - lo) / (hi - lo), 0, 1)` for each value.
pub fn normalize_costs(raw: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(hi > lo) {
        return Err(Error::config("normalize", format!("hi ({hi}) must exceed lo ({lo})")));
    }
    Ok(raw.iter().map(|&r| ((r - lo) / (hi - lo)).clamp(0.0, 1.0)).collect())
}
