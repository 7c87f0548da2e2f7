use serde::{Deserialize, Serialize};

use super::reference::Reference;
use super::replication::ReplicationReport;
use super::stats::{least_squares, mean, sample_variance};
use crate::error::{Error, Result};
use crate::format::{serialize_sig17, serialize_sig17_opt};

/// Which lags enter the log-bias line fit.
#[derive(Debug, Clone, PartialEq)]
pub enum FitRange {
    /// Lags whose `|bias|` exceeds `factor` Monte Carlo standard errors.
    NoiseFloor {
        factor: f64,
    },
    Explicit(Vec<usize>),
}

impl Default for FitRange {
    fn default() -> Self {
        FitRange::NoiseFloor { factor: 3.0 }
    }
}

impl FitRange {
    fn describe(&self) -> String {
        match self {
            FitRange::NoiseFloor { factor } => format!("lags with |bias| > {factor} se_mean"),
            FitRange::Explicit(_) => "explicit fit_lags".into(),
        }
    }
}

/// Per-lag statistics across replications for the `G` estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSummary {
    pub lag: usize,
    pub mean_estimate: f64,
    pub abs_bias: Option<f64>,
    pub log_abs_bias: Option<f64>,
    /// Standard error of `mean_estimate` from the across-run spread.
    pub se_mean: f64,
    pub var_joint: f64,
    pub var_independent: Option<f64>,
    /// Mean of the per-run batch-means standard errors.
    pub mean_batch_se: f64,
    pub n_runs: usize,
}

/// Across-run mean of every test function at every lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSummary {
    pub lag: usize,
    pub function: usize,
    pub mean_estimate: f64,
    pub se_mean: f64,
}

/// Least-squares line `log|bias| ≈ intercept + slope · lag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasFit {
    #[serde(serialize_with = "serialize_sig17")]
    pub slope: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub intercept: f64,
    pub fit_lags: Vec<usize>,
    #[serde(serialize_with = "serialize_sig17")]
    pub r2: f64,
    /// Slope standard error propagated from the per-lag Monte Carlo errors
    /// (`se(log|b|) ≈ se_mean / |b|`), treating lags as independent.
    #[serde(serialize_with = "serialize_sig17")]
    pub slope_se_propagated: f64,
    /// Residual-based OLS standard error; absent with fewer than 3 lags.
    #[serde(serialize_with = "serialize_sig17_opt")]
    pub slope_se_residual: Option<f64>,
    pub rule: String,
}

impl BiasFit {
    /// The larger of the two slope standard errors.
    pub fn slope_se(&self) -> f64 {
        match self.slope_se_residual {
            Some(r) if r.is_finite() => r.max(self.slope_se_propagated),
            _ => self.slope_se_propagated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub lags: Vec<usize>,
    pub rows: Vec<LagSummary>,
    pub functions: Vec<FunctionSummary>,
    pub fit: Option<BiasFit>,
    /// Why no fit was produced, when `fit` is `None`.
    pub fit_note: Option<String>,
    pub reference: Option<Reference>,
    pub n_runs: usize,
}

impl AggregateReport {
    pub fn row(&self, lag: usize) -> Option<&LagSummary> {
        self.rows.iter().find(|r| r.lag == lag)
    }
}

/// Across-run statistics per lag plus the bias-decay fit.
///
/// Reports are ordered by replication index first, so the result does not
/// depend on the order in which parallel runs finished.
pub fn aggregate(
    reports: &[ReplicationReport],
    reference: Option<&Reference>,
    fit_range: &FitRange,
) -> Result<AggregateReport> {
    if reports.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "aggregation needs at least 2 replications, got {}",
            reports.len()
        )));
    }
    let mut sorted: Vec<&ReplicationReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.replication_index);
    let lags = sorted[0].lags.clone();
    if let Some(bad) = sorted.iter().find(|r| r.lags != lags) {
        return Err(Error::InvalidArgument(format!(
            "replication {} has lags {:?}, expected {:?}",
            bad.replication_index, bad.lags, lags
        )));
    }
    let runs = sorted.len();
    let functions = sorted[0].estimates.first().map_or(0, Vec::len);
    let g_index = sorted[0].g_index;

    let mut rows = Vec::with_capacity(lags.len());
    let mut function_rows = Vec::new();
    for (i, &lag) in lags.iter().enumerate() {
        let est: Vec<f64> = sorted.iter().map(|r| r.estimates[i][g_index]).collect();
        let m = mean(&est);
        let var_joint = sample_variance(&est);
        let se_mean = (var_joint / runs as f64).sqrt();
        let var_independent = if sorted.iter().all(|r| r.independent.is_some()) {
            let ind: Vec<f64> = sorted.iter().map(|r| r.independent.as_ref().unwrap()[i]).collect();
            Some(sample_variance(&ind))
        } else {
            None
        };
        let abs_bias = reference.map(|r| (m - r.value).abs());
        rows.push(LagSummary {
            lag,
            mean_estimate: m,
            abs_bias,
            log_abs_bias: abs_bias.map(f64::ln),
            se_mean,
            var_joint,
            var_independent,
            mean_batch_se: mean(&sorted.iter().map(|r| r.batch_se[i]).collect::<Vec<_>>()),
            n_runs: runs,
        });
        for j in 0..functions {
            let v: Vec<f64> = sorted.iter().map(|r| r.estimates[i][j]).collect();
            function_rows.push(FunctionSummary {
                lag,
                function: j,
                mean_estimate: mean(&v),
                se_mean: (sample_variance(&v) / runs as f64).sqrt(),
            });
        }
    }

    let (fit, fit_note) = match reference {
        None => (None, Some("no reference value".to_string())),
        Some(_) => fit_bias(&rows, fit_range),
    };
    Ok(AggregateReport {
        lags,
        rows,
        functions: function_rows,
        fit,
        fit_note,
        reference: reference.cloned(),
        n_runs: runs,
    })
}

fn fit_bias(rows: &[LagSummary], range: &FitRange) -> (Option<BiasFit>, Option<String>) {
    let selected: Vec<&LagSummary> = rows
        .iter()
        .filter(|r| {
            let b = r.abs_bias.unwrap_or(0.0);
            b > 0.0
                && match range {
                    FitRange::NoiseFloor { factor } => b > factor * r.se_mean,
                    FitRange::Explicit(lags) => lags.contains(&r.lag),
                }
        })
        .collect();
    if selected.len() < 2 {
        return (
            None,
            Some(format!(
                "{} lag(s) selected by rule `{}`; a fit needs 2",
                selected.len(),
                range.describe()
            )),
        );
    }
    let x: Vec<f64> = selected.iter().map(|r| r.lag as f64).collect();
    let y: Vec<f64> = selected.iter().map(|r| r.log_abs_bias.unwrap()).collect();
    let Some(line) = least_squares(&x, &y) else {
        return (None, Some("selected lags are all equal".into()));
    };
    let mx = mean(&x);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let propagated = selected
        .iter()
        .zip(&x)
        .map(|(r, xi)| {
            let c = (xi - mx) / sxx;
            let se_log = r.se_mean / r.abs_bias.unwrap();
            c * c * se_log * se_log
        })
        .sum::<f64>()
        .sqrt();
    (
        Some(BiasFit {
            slope: line.slope,
            intercept: line.intercept,
            fit_lags: selected.iter().map(|r| r.lag).collect(),
            r2: line.r2,
            slope_se_propagated: propagated,
            slope_se_residual: line.slope_se.is_finite().then_some(line.slope_se),
            rule: range.describe(),
        }),
        None,
    )
}
