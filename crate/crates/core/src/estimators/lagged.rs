use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::record::StepRecord;
use crate::error::{Error, Result};
use crate::summation::KahanSum;

/// Streaming fixed-lag estimator for several lags and test functions at once.
///
/// Window products come from differences of the compensated log-prefix sums
/// `S_p = Σ_{q<p} log g_q`, so each record costs `O(#lags · #functions)`
/// regardless of the lag length.
#[derive(Debug, Clone)]
pub struct LaggedAccumulator {
    lags: Vec<usize>,
    functions: usize,
    window_limit: Option<u64>,
    first_step: Option<u64>,
    seen: u64,
    log_prefix: KahanSum,
    // S_p for the last max_lag + 1 steps, slot p % len
    prefix_ring: Vec<f64>,
    num: Vec<Vec<KahanSum>>,
    den: Vec<KahanSum>,
    windows: Vec<u64>,
    started: Instant,
}

impl LaggedAccumulator {
    /// `lags` are sorted and deduplicated. With `window_limit = Some(n)` only
    /// windows starting at `k < n` (counted from the first record) are summed.
    pub fn new(lags: &[usize], functions: usize, window_limit: Option<u64>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::InvalidArgument("at least one lag is required".into()));
        }
        let mut lags = lags.to_vec();
        lags.sort_unstable();
        lags.dedup();
        let max_lag = *lags.last().unwrap();
        Ok(Self {
            num: vec![vec![KahanSum::new(); functions]; lags.len()],
            den: vec![KahanSum::new(); lags.len()],
            windows: vec![0; lags.len()],
            prefix_ring: vec![0.0; max_lag + 1],
            lags,
            functions,
            window_limit,
            first_step: None,
            seen: 0,
            log_prefix: KahanSum::new(),
            started: Instant::now(),
        })
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn functions(&self) -> usize {
        self.functions
    }

    pub fn max_lag(&self) -> usize {
        *self.lags.last().unwrap()
    }

    /// Records consumed so far.
    pub fn records_seen(&self) -> u64 {
        self.seen
    }

    pub fn record_step(&mut self, rec: &StepRecord) -> Result<()> {
        let expected = match self.first_step {
            Some(first) => first + self.seen,
            None => rec.step,
        };
        if rec.step != expected {
            return Err(Error::Sequencing {
                expected,
                got: rec.step,
            });
        }
        rec.validate(self.functions)?;
        self.first_step.get_or_insert(rec.step);

        let p = self.seen;
        let ring = self.prefix_ring.len() as u64;
        let s_p = self.log_prefix.value();
        self.prefix_ring[(p % ring) as usize] = s_p;

        for (i, &lag) in self.lags.iter().enumerate() {
            let lag = lag as u64;
            if p < lag {
                break;
            }
            let k = p - lag;
            if self.window_limit.is_some_and(|n| k >= n) {
                continue;
            }
            let s_k = self.prefix_ring[(k % ring) as usize];
            let w = (s_p - s_k).exp();
            self.den[i].add(w);
            for (acc, f) in self.num[i].iter_mut().zip(&rec.f) {
                acc.add(f * w);
            }
            self.windows[i] += 1;
        }

        self.log_prefix.add(rec.g.ln());
        self.seen += 1;
        Ok(())
    }

    pub fn record_all<'a>(&mut self, records: impl IntoIterator<Item = &'a StepRecord>) -> Result<()> {
        for r in records {
            self.record_step(r)?;
        }
        Ok(())
    }

    fn lag_index(&self, lag: usize) -> Option<usize> {
        self.lags.binary_search(&lag).ok()
    }

    /// `Σ_k F_φ_j` over the complete windows of `lag`.
    pub fn numerator(&self, lag: usize, function: usize) -> Option<f64> {
        let i = self.lag_index(lag)?;
        self.num[i].get(function).map(KahanSum::value)
    }

    /// `Σ_k F_1` over the complete windows of `lag`.
    pub fn denominator(&self, lag: usize) -> Option<f64> {
        self.lag_index(lag).map(|i| self.den[i].value())
    }

    pub fn windows(&self, lag: usize) -> Option<u64> {
        self.lag_index(lag).map(|i| self.windows[i])
    }

    pub fn finalize(&self) -> Result<EstimateReport> {
        let mut ratios = Vec::with_capacity(self.lags.len());
        for (i, &lag) in self.lags.iter().enumerate() {
            if self.windows[i] == 0 {
                return Err(Error::InsufficientData(format!(
                    "no complete window for lag {lag} after {} records",
                    self.seen
                )));
            }
            let den = self.den[i].value();
            ratios.push(self.num[i].iter().map(|n| n.value() / den).collect());
        }
        Ok(EstimateReport {
            lags: self.lags.clone(),
            ratios,
            windows: self.windows.clone(),
            standard_errors: None,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        })
    }
}

/// Finalized fixed-lag estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub lags: Vec<usize>,
    /// `ratios[i][j]`: estimate for `lags[i]` and test function `j`.
    pub ratios: Vec<Vec<f64>>,
    /// Windows summed per lag.
    pub windows: Vec<u64>,
    /// Batch-means standard errors, same shape as `ratios`, when computed.
    pub standard_errors: Option<Vec<Vec<f64>>>,
    pub wall_seconds: f64,
}

impl EstimateReport {
    pub fn ratio(&self, lag: usize, function: usize) -> Option<f64> {
        let i = self.lags.binary_search(&lag).ok()?;
        self.ratios[i].get(function).copied()
    }
}

/// `(1/n) Σ_{k<n} η^N_k(G)`, the usual DMC eigenvalue estimate.
///
/// Uses the same compensated sum as the lag-0 path of
/// [`LaggedAccumulator`], so the two agree bit-for-bit.
pub fn standard_estimator(records: &[StepRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no records".into()));
    }
    let mut sum = KahanSum::new();
    let mut count = KahanSum::new();
    for r in records {
        sum.add(r.g);
        count.add(1.0);
    }
    Ok(sum.value() / count.value())
}

/// Independent-copies ratio: numerators from `records_a`, denominators from
/// the independent trajectory `records_b`, aligned on the same windows.
pub fn independent_ratio(
    records_a: &[StepRecord],
    records_b: &[StepRecord],
    lags: &[usize],
    function: usize,
    window_limit: Option<u64>,
) -> Result<Vec<f64>> {
    if records_a.len() != records_b.len() {
        return Err(Error::InvalidArgument(format!(
            "record streams differ in length: {} vs {}",
            records_a.len(),
            records_b.len()
        )));
    }
    let functions = records_a.first().map_or(0, |r| r.f.len());
    if function >= functions {
        return Err(Error::InvalidArgument(format!(
            "test function index {function} out of range ({functions} available)"
        )));
    }
    let mut a = LaggedAccumulator::new(lags, functions, window_limit)?;
    a.record_all(records_a)?;
    let mut b = LaggedAccumulator::new(lags, records_b.first().map_or(0, |r| r.f.len()), window_limit)?;
    b.record_all(records_b)?;
    a.finalize()?;
    b.finalize()?;
    let mut out = Vec::with_capacity(lags.len());
    for &lag in lags {
        out.push(a.numerator(lag, function).unwrap() / b.denominator(lag).unwrap());
    }
    Ok(out)
}
