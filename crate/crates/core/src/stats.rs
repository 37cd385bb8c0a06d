//! Summary statistics for simulation outputs.
//!
//! Aggregation is deterministic and order-independent: sums use compensated
//! (Kahan) accumulation in index order, so results do not depend on how many
//! threads produced the inputs. Confidence intervals come either from the
//! normal approximation ([`summarize`]) or from a seeded percentile bootstrap
//! ([`bootstrap_ci`]).

use rand::Rng;
use serde::Serialize;

use crate::error::ModelError;

/// Location and uncertainty of a batch of outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeStats {
    pub n: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Confidence level of `[ci_low, ci_high]`, e.g. 0.95.
    pub level: f64,
}

/// Compensated (Kahan) sum in index order.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

pub fn mean(values: &[f64]) -> Result<f64, ModelError> {
    if values.is_empty() {
        return Err(ModelError::EmptyInput("mean of no values".into()));
    }
    Ok(kahan_sum(values) / values.len() as f64)
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_std(values: &[f64]) -> Result<f64, ModelError> {
    let m = mean(values)?;
    if values.len() < 2 {
        return Ok(0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    Ok((kahan_sum(&sq) / (values.len() - 1) as f64).sqrt())
}

/// Standard error of the mean.
pub fn std_error(values: &[f64]) -> Result<f64, ModelError> {
    Ok(sample_std(values)? / (values.len() as f64).sqrt())
}

/// Two-sided 0.975 normal quantile used for 95% intervals.
const Z_95: f64 = 1.959964;

/// Mean, standard error, and a 95% normal-approximation interval.
pub fn summarize(values: &[f64]) -> Result<OutcomeStats, ModelError> {
    let m = mean(values)?;
    let se = std_error(values)?;
    Ok(OutcomeStats {
        n: values.len(),
        mean: m,
        std_error: se,
        ci_low: m - Z_95 * se,
        ci_high: m + Z_95 * se,
        level: 0.95,
    })
}

/// Linear-interpolation percentile of an ascending-sorted slice, q in [0, 1].
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap of the mean.
///
/// Draws `n_resamples` resamples with replacement, recomputes each mean, and
/// reports the `[(1-level)/2, 1-(1-level)/2]` percentiles of those means as
/// the interval; `std_error` is the standard deviation of the resampled
/// means. Deterministic given the caller's seeded `rng`. A constant series
/// yields the degenerate interval `[c, c]`.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    values: &[f64],
    n_resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<OutcomeStats, ModelError> {
    if values.is_empty() {
        return Err(ModelError::EmptyInput("bootstrap of no values".into()));
    }
    if n_resamples == 0 {
        return Err(ModelError::InvalidParameter(
            "bootstrap needs at least one resample".into(),
        ));
    }
    if !level.is_finite() || level <= 0.0 || level >= 1.0 {
        return Err(ModelError::InvalidParameter(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let n = values.len();
    let mut resample = vec![0.0; n];
    let mut means = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        for slot in resample.iter_mut() {
            *slot = values[rng.random_range(0..n)];
        }
        means.push(kahan_sum(&resample) / n as f64);
    }
    let boot_se = sample_std(&means)?;
    means.sort_by(|a, b| a.total_cmp(b));
    let alpha = (1.0 - level) / 2.0;
    Ok(OutcomeStats {
        n,
        mean: mean(values)?,
        std_error: boot_se,
        ci_low: percentile_sorted(&means, alpha),
        ci_high: percentile_sorted(&means, 1.0 - alpha),
        level,
    })
}

/// Average rank of each value, with ties sharing their mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = shared;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation: Pearson correlation of the two rank vectors,
/// with tied values receiving average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::InvalidParameter(format!(
            "rank correlation needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(ModelError::EmptyInput(
            "rank correlation of fewer than two pairs".into(),
        ));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let mx = mean(&rx)?;
    let my = mean(&ry)?;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(ModelError::InvalidParameter(
            "rank correlation undefined for a constant series".into(),
        ));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Sample skewness `m3 / m2^1.5` (biased moment form).
pub fn skewness(values: &[f64]) -> Result<f64, ModelError> {
    if values.len() < 3 {
        return Err(ModelError::EmptyInput(
            "skewness of fewer than three values".into(),
        ));
    }
    let m = mean(values)?;
    let n = values.len() as f64;
    let m2: f64 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3: f64 = values.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    if m2 == 0.0 {
        return Err(ModelError::InvalidParameter(
            "skewness undefined for a constant series".into(),
        ));
    }
    Ok(m3 / m2.powf(1.5))
}
