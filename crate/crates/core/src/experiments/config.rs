use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dmc::Observable;
use crate::error::{Error, Result};
use crate::finite::FiniteFkModel;
use crate::models::{GuidedHarmonicOscillator, HarmonicOscillator};

/// Which model an experiment simulates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    HarmonicOscillator(HarmonicOscillator),
    GuidedHarmonicOscillator(GuidedHarmonicOscillator),
    Finite(FiniteFkModel),
}

impl ModelSpec {
    pub fn is_finite(&self) -> bool {
        matches!(self, ModelSpec::Finite(_))
    }
}

/// A named test function `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum TestFunctionSpec {
    /// The potential itself; estimates `λ`.
    #[serde(rename = "G")]
    Potential,
    #[serde(rename = "one")]
    One,
    /// Indicator of a set of states (finite models).
    #[serde(rename = "indicator", alias = "identity-on-A")]
    Indicator { states: Vec<usize> },
    /// Arbitrary values per state (finite models).
    #[serde(rename = "vector")]
    Vector { values: Vec<f64> },
    /// Indicator of `[lo, hi]` (continuous models).
    #[serde(rename = "interval")]
    Interval { lo: f64, hi: f64 },
    /// `x^order` (continuous models).
    #[serde(rename = "moment")]
    Moment { order: i32 },
}

impl TestFunctionSpec {
    pub fn label(&self) -> String {
        match self {
            TestFunctionSpec::Potential => "G".into(),
            TestFunctionSpec::One => "one".into(),
            TestFunctionSpec::Indicator { states } => format!("indicator{states:?}"),
            TestFunctionSpec::Vector { values } => format!("vector{values:?}"),
            TestFunctionSpec::Interval { lo, hi } => format!("interval[{lo},{hi}]"),
            TestFunctionSpec::Moment { order } => format!("moment{order}"),
        }
    }

    /// Values on each state of a finite model, if the function applies there.
    pub fn finite_values(&self, model: &FiniteFkModel) -> Option<Vec<f64>> {
        let d = model.dim();
        match self {
            TestFunctionSpec::Potential => Some(model.potential().to_vec()),
            TestFunctionSpec::One => Some(vec![1.0; d]),
            TestFunctionSpec::Indicator { states } => {
                let mut v = vec![0.0; d];
                for &s in states {
                    v[s] = 1.0;
                }
                Some(v)
            }
            TestFunctionSpec::Vector { values } => Some(values.clone()),
            _ => None,
        }
    }

    pub(crate) fn finite_observable(&self, model: &FiniteFkModel) -> Observable<usize> {
        match self {
            TestFunctionSpec::Potential => Observable::Potential,
            TestFunctionSpec::One => Observable::One,
            other => {
                let values = other.finite_values(model).expect("validated");
                Observable::function(move |x: &usize| values[*x])
            }
        }
    }

    pub(crate) fn real_observable(&self) -> Observable<f64> {
        match *self {
            TestFunctionSpec::Potential => Observable::Potential,
            TestFunctionSpec::One => Observable::One,
            TestFunctionSpec::Interval { lo, hi } => {
                Observable::function(move |x: &f64| if (lo..=hi).contains(x) { 1.0 } else { 0.0 })
            }
            TestFunctionSpec::Moment { order } => Observable::function(move |x: &f64| x.powi(order)),
            _ => unreachable!("validated"),
        }
    }

    fn validate(&self, field: &str, model: &ModelSpec) -> Result<()> {
        match (self, model) {
            (TestFunctionSpec::Potential | TestFunctionSpec::One, _) => Ok(()),
            (TestFunctionSpec::Indicator { states }, ModelSpec::Finite(m)) => {
                match states.iter().position(|&s| s >= m.dim()) {
                    Some(i) => Err(Error::validation(
                        format!("{field}.states[{i}]"),
                        format!("state {} out of range for {} states", states[i], m.dim()),
                    )),
                    None => Ok(()),
                }
            }
            (TestFunctionSpec::Vector { values }, ModelSpec::Finite(m)) => {
                if values.len() != m.dim() {
                    return Err(Error::validation(
                        format!("{field}.values"),
                        format!("expected {} values, found {}", m.dim(), values.len()),
                    ));
                }
                match values.iter().position(|v| !v.is_finite()) {
                    Some(i) => Err(Error::validation(format!("{field}.values[{i}]"), "must be finite")),
                    None => Ok(()),
                }
            }
            (TestFunctionSpec::Interval { lo, hi }, m) if !m.is_finite() => {
                if lo <= hi {
                    Ok(())
                } else {
                    Err(Error::validation(field, format!("empty interval [{lo}, {hi}]")))
                }
            }
            (TestFunctionSpec::Moment { order }, m) if !m.is_finite() => {
                if *order >= 0 {
                    Ok(())
                } else {
                    Err(Error::validation(format!("{field}.order"), "must be >= 0"))
                }
            }
            (f, _) => Err(Error::validation(
                field,
                format!("test function `{}` does not apply to this model", f.label()),
            )),
        }
    }
}

fn default_test_functions() -> Vec<TestFunctionSpec> {
    vec![TestFunctionSpec::Potential]
}

/// Everything needed to reproduce a replicated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    /// Walker count `N`.
    #[serde(alias = "N")]
    pub walkers: usize,
    /// Windows per lag `n`.
    #[serde(alias = "n")]
    pub windows: u64,
    pub lags: Vec<usize>,
    /// Independent replications `R`.
    #[serde(alias = "R")]
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default = "default_test_functions")]
    pub test_functions: Vec<TestFunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Also run an independent copy per replication for the independent-ratio estimator.
    #[serde(default)]
    pub variance_compare: bool,
    /// Batches for batch-means standard errors; `⌊√n⌋` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_count: Option<usize>,
    /// Lags used for the bias-decay fit; noise-floor rule when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_lags: Option<Vec<usize>>,
    /// Leading records discarded before estimation.
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Write each replication's record stream to `records/`.
    #[serde(default)]
    pub dump_records: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::validation("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.walkers == 0 {
            return Err(Error::validation("walkers", "N must be >= 1"));
        }
        if self.windows == 0 {
            return Err(Error::validation("windows", "n must be >= 1"));
        }
        if self.lags.is_empty() {
            return Err(Error::validation("lags", "at least one lag is required"));
        }
        if self.replications < 2 {
            return Err(Error::validation(
                "replications",
                "R must be >= 2 for variance estimates",
            ));
        }
        if self.test_functions.is_empty() {
            return Err(Error::validation(
                "test_functions",
                "at least one test function is required",
            ));
        }
        for (i, f) in self.test_functions.iter().enumerate() {
            f.validate(&format!("test_functions[{i}]"), &self.model)?;
        }
        if self.potential_index().is_none() {
            return Err(Error::validation("test_functions", "must include {\"kind\": \"G\"}"));
        }
        if let Some(b) = self.batch_count {
            if b < 2 || b as u64 > self.windows {
                return Err(Error::validation(
                    "batch_count",
                    format!("{b} must be in [2, n = {}]", self.windows),
                ));
            }
        } else if self.windows < 2 {
            return Err(Error::validation("windows", "batch-means errors need n >= 2"));
        }
        if let Some(fit) = &self.fit_lags {
            if let Some(l) = fit.iter().find(|l| !self.lags.contains(l)) {
                return Err(Error::validation("fit_lags", format!("lag {l} is not in `lags`")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::validation("workers", "must be >= 1"));
        }
        Ok(())
    }

    /// Sorted, deduplicated lags.
    pub fn sorted_lags(&self) -> Vec<usize> {
        let mut lags = self.lags.clone();
        lags.sort_unstable();
        lags.dedup();
        lags
    }

    pub fn max_lag(&self) -> usize {
        self.lags.iter().copied().max().unwrap_or(0)
    }

    /// Index of the `G` test function, whose estimates target `λ`.
    pub fn potential_index(&self) -> Option<usize> {
        self.test_functions
            .iter()
            .position(|f| matches!(f, TestFunctionSpec::Potential))
    }

    /// Records simulated per trajectory: burn-in plus `n + max(lags)`.
    pub fn records_per_trajectory(&self) -> u64 {
        self.burn_in + self.windows + self.max_lag() as u64
    }
}
