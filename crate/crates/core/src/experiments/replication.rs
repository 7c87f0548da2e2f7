use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, AggregateReport, FitRange};
use super::config::{ExperimentConfig, ModelSpec};
use super::reference::{reference_value, Reference};
use crate::dmc::{Observable, SimulatableFkModel, Trajectory};
use crate::error::{Error, Result};
use crate::estimators::{batch_means_variance, default_batch_count, independent_ratio, LaggedAccumulator, StepRecord};
use crate::models::FiniteAdapter;
use crate::rng::{RngStream, StreamRole};

/// Result of one independent trajectory (plus its independent copy when enabled).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub replication_index: u64,
    pub stream: RngStream,
    pub lags: Vec<usize>,
    /// Column of `estimates` holding the `G` test function.
    pub g_index: usize,
    /// `estimates[i][j]` for `lags[i]` and test function `j`.
    pub estimates: Vec<Vec<f64>>,
    /// Independent-ratio estimates of `λ` per lag.
    pub independent: Option<Vec<f64>>,
    /// Batch-means standard error of the `G` estimate per lag.
    pub batch_se: Vec<f64>,
    pub runtime_seconds: f64,
}

fn simulate<M: SimulatableFkModel>(
    model: &M,
    observables: &[Observable<M::State>],
    config: &ExperimentConfig,
    stream: RngStream,
) -> Result<Vec<StepRecord>> {
    let mut trajectory = Trajectory::new(model, config.walkers, stream, observables)?;
    let total = config.records_per_trajectory() as usize;
    let mut records = trajectory.collect_records(total)?;
    records.drain(..config.burn_in as usize);
    Ok(records)
}

fn simulate_spec(config: &ExperimentConfig, stream: RngStream) -> Result<Vec<StepRecord>> {
    match &config.model {
        ModelSpec::HarmonicOscillator(m) => {
            let obs: Vec<_> = config.test_functions.iter().map(|f| f.real_observable()).collect();
            simulate(m, &obs, config, stream)
        }
        ModelSpec::GuidedHarmonicOscillator(m) => {
            let obs: Vec<_> = config.test_functions.iter().map(|f| f.real_observable()).collect();
            simulate(m, &obs, config, stream)
        }
        ModelSpec::Finite(m) => {
            let obs: Vec<_> = config.test_functions.iter().map(|f| f.finite_observable(m)).collect();
            simulate(&FiniteAdapter::new(m.clone()), &obs, config, stream)
        }
    }
}

/// Runs replication `index` and returns its report with the trajectory's records.
pub fn run_replication_records(
    config: &ExperimentConfig,
    replication_index: u64,
) -> Result<(ReplicationReport, Vec<StepRecord>)> {
    let started = Instant::now();
    let stream = RngStream::trajectory(config.master_seed, replication_index);
    let wrap = |e: Error| Error::Replication {
        master_seed: config.master_seed,
        replication_index,
        source: Box::new(e),
    };
    let g_index = config
        .potential_index()
        .ok_or_else(|| Error::validation("test_functions", "must include G"))?;
    let lags = config.sorted_lags();
    let n = config.windows;

    let records = simulate_spec(config, stream).map_err(wrap)?;
    let mut acc = LaggedAccumulator::new(&lags, config.test_functions.len(), Some(n)).map_err(wrap)?;
    acc.record_all(&records).map_err(wrap)?;
    let report = acc.finalize().map_err(wrap)?;

    let batches = config.batch_count.unwrap_or_else(|| default_batch_count(n as usize));
    let batch_se = lags
        .iter()
        .map(|&lag| batch_means_variance(&records, lag, g_index, batches, Some(n)).map(|b| b.standard_error()))
        .collect::<Result<Vec<_>>>()
        .map_err(wrap)?;

    let independent = if config.variance_compare {
        let copy = RngStream::new(config.master_seed, replication_index, StreamRole::IndependentCopy);
        let other = simulate_spec(config, copy).map_err(wrap)?;
        Some(independent_ratio(&records, &other, &lags, g_index, Some(n)).map_err(wrap)?)
    } else {
        None
    };

    Ok((
        ReplicationReport {
            replication_index,
            stream,
            lags,
            g_index,
            estimates: report.ratios,
            independent,
            batch_se,
            runtime_seconds: started.elapsed().as_secs_f64(),
        },
        records,
    ))
}

pub fn run_replication(config: &ExperimentConfig, replication_index: u64) -> Result<ReplicationReport> {
    run_replication_records(config, replication_index).map(|(r, _)| r)
}

/// Reports of a full experiment, sorted by replication index, with their aggregate.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub reports: Vec<ReplicationReport>,
    pub aggregate: AggregateReport,
    pub reference: Option<Reference>,
    /// Record streams per replication when `dump_records` is set.
    pub records: Option<Vec<Vec<StepRecord>>>,
    pub wall_seconds: f64,
    pub workers: usize,
}

/// Runs all replications on a pool of `workers` threads (default: all cores)
/// and aggregates them. Results do not depend on the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentOutcome> {
    config.validate()?;
    let started = Instant::now();
    let workers = workers
        .or(config.workers)
        .unwrap_or_else(rayon::current_num_threads)
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;

    let keep_records = config.dump_records;
    let results: Vec<Result<(ReplicationReport, Option<Vec<StepRecord>>)>> = pool.install(|| {
        (0..config.replications as u64)
            .into_par_iter()
            .map(|i| run_replication_records(config, i).map(|(r, recs)| (r, keep_records.then_some(recs))))
            .collect()
    });
    let mut reports = Vec::with_capacity(results.len());
    let mut records = keep_records.then(Vec::new);
    for r in results {
        let (report, recs) = r?;
        reports.push(report);
        if let (Some(all), Some(recs)) = (records.as_mut(), recs) {
            all.push(recs);
        }
    }
    reports.sort_by_key(|r| r.replication_index);

    let reference = match reference_value(&config.model) {
        Ok(r) => Some(r),
        Err(Error::NoReference(_)) => None,
        Err(e) => return Err(e),
    };
    let fit = match &config.fit_lags {
        Some(lags) => FitRange::Explicit(lags.clone()),
        None => FitRange::default(),
    };
    let aggregate = aggregate(&reports, reference.as_ref(), &fit)?;
    Ok(ExperimentOutcome {
        reports,
        aggregate,
        reference,
        records,
        wall_seconds: started.elapsed().as_secs_f64(),
        workers,
    })
}
