use serde::{Deserialize, Serialize};

use super::record::StepRecord;
use crate::error::{Error, Result};
use crate::summation::KahanSum;

/// Ratio estimate with its nonoverlapping batch-means variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchMeans {
    /// `Σ F_φ / Σ F_1` over all windows.
    pub ratio: f64,
    /// Estimate of the asymptotic variance `σ²` in `√n (ratio − μ) ⇒ N(0, σ²)`.
    pub sigma2: f64,
    /// `σ² / n`, the squared standard error of `ratio`.
    pub variance_of_mean: f64,
    pub windows: usize,
    pub batches: usize,
}

impl BatchMeans {
    pub fn standard_error(&self) -> f64 {
        self.variance_of_mean.sqrt()
    }
}

/// `⌊√n⌋`, floored at 2.
pub fn default_batch_count(windows: usize) -> usize {
    ((windows as f64).sqrt().floor() as usize).max(2)
}

/// Per-window `(F_φ, F_1)` for `lag`, computed with the same log-prefix sums
/// as the streaming accumulator.
pub fn window_values(
    records: &[StepRecord],
    lag: usize,
    function: usize,
    window_limit: Option<u64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if records.len() <= lag {
        return Err(Error::InsufficientData(format!(
            "{} records cannot hold a window of lag {lag}",
            records.len()
        )));
    }
    let mut windows = records.len() - lag;
    if let Some(limit) = window_limit {
        windows = windows.min(limit as usize);
    }
    let mut prefix = Vec::with_capacity(records.len());
    let mut s = KahanSum::new();
    for (i, r) in records.iter().enumerate() {
        r.validate(r.f.len())?;
        if function >= r.f.len() {
            return Err(Error::InvalidArgument(format!(
                "record {i}: test function index {function} out of range"
            )));
        }
        prefix.push(s.value());
        s.add(r.g.ln());
    }
    let mut num = Vec::with_capacity(windows);
    let mut den = Vec::with_capacity(windows);
    for k in 0..windows {
        let w = (prefix[k + lag] - prefix[k]).exp();
        num.push(records[k + lag].f[function] * w);
        den.push(w);
    }
    Ok((num, den))
}

/// Batch-means variance of the fixed-lag ratio via the delta method.
///
/// The window index range is cut into `batch_count` contiguous batches of
/// near-equal size `m_b`. With `e_k = F_1(k)·(f_{k+l} − r)` the linearized
/// ratio error, each batch contributes `z_b = mean_b(e) / mean(F_1)` and
/// `σ² ≈ Σ_b m_b (z_b − z̄)² / (B − 1)`.
pub fn batch_means_variance(
    records: &[StepRecord],
    lag: usize,
    function: usize,
    batch_count: usize,
    window_limit: Option<u64>,
) -> Result<BatchMeans> {
    if batch_count < 2 {
        return Err(Error::InvalidArgument(format!(
            "batch count {batch_count} must be >= 2"
        )));
    }
    let (num, den) = window_values(records, lag, function, window_limit)?;
    let n = num.len();
    if n < batch_count {
        return Err(Error::InsufficientData(format!(
            "{n} windows cannot fill {batch_count} batches"
        )));
    }
    let num_total: KahanSum = num.iter().collect();
    let den_total: KahanSum = den.iter().collect();
    let ratio = num_total.value() / den_total.value();
    let mean_den = den_total.value() / n as f64;

    // Centre on the first window's value so a constant f gives exactly zero residuals.
    let f = |k: usize| records[k + lag].f[function];
    let pivot = f(0);
    let shift: KahanSum = den.iter().enumerate().map(|(k, w)| w * (f(k) - pivot)).collect();
    let centre = pivot + shift.value() / den_total.value();

    let mut batch_sizes = Vec::with_capacity(batch_count);
    let mut batch_z = Vec::with_capacity(batch_count);
    for b in 0..batch_count {
        let (lo, hi) = (b * n / batch_count, (b + 1) * n / batch_count);
        let e: KahanSum = (lo..hi).map(|k| den[k] * (f(k) - centre)).collect();
        let m = (hi - lo) as f64;
        batch_sizes.push(m);
        batch_z.push(e.value() / m / mean_den);
    }
    let z_bar = batch_sizes.iter().zip(&batch_z).map(|(m, z)| m * z).sum::<f64>() / n as f64;
    let sigma2 = batch_sizes
        .iter()
        .zip(&batch_z)
        .map(|(m, z)| m * (z - z_bar) * (z - z_bar))
        .sum::<f64>()
        / (batch_count - 1) as f64;
    Ok(BatchMeans {
        ratio,
        sigma2,
        variance_of_mean: sigma2 / n as f64,
        windows: n,
        batches: batch_count,
    })
}
