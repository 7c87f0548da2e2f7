use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, ModelSpec};
use super::replication::ExperimentOutcome;
use crate::error::{Error, Result};
use crate::estimators::write_records_csv;
use crate::format::{serialize_sig17, sig17};
use crate::rng::StreamRole;

/// Run-dependent values; the only part of the outputs allowed to differ
/// between two runs of the same configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RuntimeInfo {
    #[serde(serialize_with = "serialize_sig17")]
    pub wall_seconds: f64,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub replication_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub bias_csv: PathBuf,
    pub variance_csv: PathBuf,
    pub fit_json: PathBuf,
    pub meta_json: PathBuf,
    pub estimates_csv: PathBuf,
    pub record_dumps: Vec<PathBuf>,
}

fn opt(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

fn bias_csv(outcome: &ExperimentOutcome) -> String {
    let mut s = String::from("lag,mean_estimate,abs_bias,log_abs_bias,se_mean,n_runs\n");
    for r in &outcome.aggregate.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.lag,
            sig17(r.mean_estimate),
            opt(r.abs_bias),
            opt(r.log_abs_bias),
            sig17(r.se_mean),
            r.n_runs
        );
    }
    s
}

fn variance_csv(outcome: &ExperimentOutcome) -> String {
    let mut s = String::from("lag,var_joint,var_independent,n_runs\n");
    for r in &outcome.aggregate.rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.lag,
            sig17(r.var_joint),
            opt(r.var_independent),
            r.n_runs
        );
    }
    s
}

fn estimates_csv(config: &ExperimentConfig, outcome: &ExperimentOutcome) -> Result<String> {
    // Finite models: every estimate targets η∞(φ).
    let eta_inf = match &config.model {
        ModelSpec::Finite(m) => Some((m, m.dominant_eigentriple()?)),
        _ => None,
    };
    let mut s = String::from("lag,function,label,mean_estimate,se_mean,reference\n");
    for f in &outcome.aggregate.functions {
        let spec = &config.test_functions[f.function];
        let reference = match (&eta_inf, spec) {
            (Some((m, e)), spec) => spec.finite_values(m).map(|phi| e.eta_inf.integrate(&phi)).transpose()?,
            (None, _) if f.function == outcome.reports[0].g_index => outcome.reference.as_ref().map(|r| r.value),
            _ => None,
        };
        let _ = writeln!(
            s,
            "{},{},\"{}\",{},{},{}",
            f.lag,
            f.function,
            spec.label().replace('"', "'"),
            sig17(f.mean_estimate),
            sig17(f.se_mean),
            opt(reference)
        );
    }
    Ok(s)
}

fn fit_json(outcome: &ExperimentOutcome) -> Result<String> {
    let value = match &outcome.aggregate.fit {
        Some(fit) => serde_json::to_value(fit)?,
        None => serde_json::json!({
            "slope": null,
            "intercept": null,
            "fit_lags": [],
            "r2": null,
            "note": outcome.aggregate.fit_note,
        }),
    };
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

#[derive(Serialize)]
struct StreamMeta {
    replication_index: u64,
    role: StreamRole,
    child_seed: u64,
}

fn meta_json(config: &ExperimentConfig, outcome: &ExperimentOutcome, runtime: &RuntimeInfo) -> Result<String> {
    let mut echo = config.clone();
    echo.output_dir = None;
    echo.workers = None;
    let mut streams = Vec::new();
    for r in &outcome.reports {
        streams.push(StreamMeta {
            replication_index: r.replication_index,
            role: StreamRole::Trajectory,
            child_seed: r.stream.child_seed(),
        });
        if config.variance_compare {
            let copy =
                crate::rng::RngStream::new(r.stream.master_seed, r.replication_index, StreamRole::IndependentCopy);
            streams.push(StreamMeta {
                replication_index: r.replication_index,
                role: StreamRole::IndependentCopy,
                child_seed: copy.child_seed(),
            });
        }
    }
    let initial_law = match &config.model {
        ModelSpec::HarmonicOscillator(m) => serde_json::to_value(m.init())?,
        ModelSpec::GuidedHarmonicOscillator(m) => serde_json::to_value(m.init())?,
        ModelSpec::Finite(m) => serde_json::to_value(m.initial())?,
    };
    let value = serde_json::json!({
        "code_version": concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")),
        "config": echo,
        "initial_law": initial_law,
        "records_per_trajectory": config.records_per_trajectory(),
        "seeds": {
            "master_seed": config.master_seed,
            "replications": config.replications,
            "derivation": "child = splitmix64 avalanche of (master_seed, replication_index, role); generator ChaCha8",
            "streams": streams,
        },
        "reference": outcome.reference,
        "runtime": runtime,
    });
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

/// Writes `bias.csv`, `variance.csv`, `fit.json`, `meta.json`,
/// `estimates.csv` (and `records/` when enabled) into `dir`.
///
/// Everything is rendered in memory first; if any write fails, files
/// already written by this call are removed.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    outcome: &ExperimentOutcome,
    runtime: &RuntimeInfo,
) -> Result<OutputFiles> {
    let files = OutputFiles {
        bias_csv: dir.join("bias.csv"),
        variance_csv: dir.join("variance.csv"),
        fit_json: dir.join("fit.json"),
        meta_json: dir.join("meta.json"),
        estimates_csv: dir.join("estimates.csv"),
        record_dumps: Vec::new(),
    };
    let mut contents: Vec<(PathBuf, Vec<u8>)> = vec![
        (files.bias_csv.clone(), bias_csv(outcome).into_bytes()),
        (files.variance_csv.clone(), variance_csv(outcome).into_bytes()),
        (files.fit_json.clone(), fit_json(outcome)?.into_bytes()),
        (
            files.estimates_csv.clone(),
            estimates_csv(config, outcome)?.into_bytes(),
        ),
        (
            files.meta_json.clone(),
            meta_json(config, outcome, runtime)?.into_bytes(),
        ),
    ];
    let mut files = files;
    if let Some(all) = &outcome.records {
        for (report, records) in outcome.reports.iter().zip(all) {
            let path = dir
                .join("records")
                .join(format!("replication_{:05}.csv", report.replication_index));
            let mut buf = Vec::new();
            write_records_csv(&mut buf, records).map_err(|e| Error::io(&path, e))?;
            files.record_dumps.push(path.clone());
            contents.push((path, buf));
        }
    }

    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        if !files.record_dumps.is_empty() {
            let rec = dir.join("records");
            fs::create_dir_all(&rec).map_err(|e| Error::io(&rec, e))?;
        }
        for (path, bytes) in &contents {
            fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
            written.push(path.clone());
        }
        Ok(())
    })();
    if let Err(e) = result {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(files)
}
