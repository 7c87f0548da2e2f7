//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs as a plain binary (`harness = false`) so that the shared benchmark-scale
//! harmonic oscillator experiment is simulated once and reused by the bias
//! and variance criteria.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lagdmc_core::checks::{oracle_check, unbiasedness_check, UnbiasednessConfig};
use lagdmc_core::estimators::{standard_estimator, LaggedAccumulator, StepRecord};
use lagdmc_core::experiments::stats::{f_test_greater, jarque_bera, mean, sample_variance};
use lagdmc_core::experiments::{
    aggregate, reference_value, run_experiment, write_outputs, AggregateReport, ExperimentConfig, ExperimentOutcome,
    FitRange, ModelSpec, ReplicationReport, RuntimeInfo,
};
use lagdmc_core::finite::{FiniteFkModel, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use lagdmc_core::models::{GaussianInit, GuidedHarmonicOscillator, HarmonicOscillator, KernelMode};
use lagdmc_core::{Observable, RngStream, Trajectory};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn two_state() -> FiniteFkModel {
    FiniteFkModel::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]], vec![1.0, 0.5], vec![0.5, 0.5]).unwrap()
}

fn random_model(rng: &mut ChaCha8Rng, d: usize) -> FiniteFkModel {
    let mut rows = Vec::with_capacity(d);
    for _ in 0..d {
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        rows.push(raw.into_iter().map(|v| v / total).collect());
    }
    let g = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    FiniteFkModel::new(rows, g, raw.into_iter().map(|v| v / total).collect()).unwrap()
}

fn oracle_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst_residual = 0.0f64;
    for i in 0..20 {
        let model = random_model(&mut rng, 4);
        let report = oracle_check(&model, DEFAULT_TOL, DEFAULT_MAX_ITERS, 10).map_err(|e| format!("model {i}: {e}"))?;
        worst_residual = worst_residual.max(report.eigen.residual);
        for c in &report.checks {
            let wanted = matches!(
                c.name.as_str(),
                n if n.starts_with("eigen residual") || n.starts_with("η∞(G)") || n.starts_with("semigroup")
            );
            if wanted && !c.passed {
                return Err(format!(
                    "model {i}: {} = {:e} > {:e}",
                    c.name, c.discrepancy, c.tolerance
                ));
            }
        }
    }
    Ok(format!("20 models, worst eigen residual {worst_residual:.2e}"))
}

fn exact_unbiasedness() -> Outcome {
    let mut details = Vec::new();
    for steps in 1..=3 {
        let config = UnbiasednessConfig {
            model: two_state(),
            walkers: 2,
            steps,
            runs: 1_000_000,
            master_seed: 2000 + steps as u64,
            sigma: 4.0,
        };
        let r = unbiasedness_check(&config).map_err(|e| e.to_string())?;
        let z = (r.monte_carlo_mean - r.enumerated) / r.monte_carlo_se;
        if !r.enumeration_matches {
            return Err(format!(
                "n={steps}: enumeration {:.15} vs oracle {:.15}",
                r.enumerated, r.oracle_gamma
            ));
        }
        if !r.monte_carlo_within {
            return Err(format!("n={steps}: engine mean off by {z:.2} SE"));
        }
        details.push(format!("n={steps}: z={z:+.2}"));
    }
    Ok(details.join(", "))
}

/// Ratio recomputed from explicit products over every window.
fn naive_ratio(records: &[StepRecord], lag: usize, function: usize) -> f64 {
    let windows = records.len() - lag;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..windows {
        let w: f64 = records[k..k + lag].iter().map(|r| r.g).product();
        num += w * records[k + lag].f[function];
        den += w;
    }
    num / den
}

fn streaming_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for s in 0..1000 {
        let len = rng.random_range(12..=200usize);
        let functions = rng.random_range(1..=3usize);
        let records: Vec<StepRecord> = (0..len)
            .map(|k| {
                let g = rng.random_range(0.05..2.0);
                let mut f = vec![g];
                f.extend((1..functions).map(|_| rng.random_range(-3.0..3.0)));
                StepRecord::new(k as u64, g, f)
            })
            .collect();
        let mut lags: Vec<usize> = (0..=10).filter(|_| rng.random_bool(0.4)).collect();
        lags.push(0);
        let mut acc = LaggedAccumulator::new(&lags, functions, None).map_err(|e| e.to_string())?;
        acc.record_all(&records).map_err(|e| e.to_string())?;
        let report = acc.finalize().map_err(|e| e.to_string())?;
        for &lag in acc.lags() {
            for j in 0..functions {
                let got = report.ratio(lag, j).unwrap();
                let want = naive_ratio(&records, lag, j);
                let rel = (got - want).abs() / want.abs().max(1e-300);
                worst = worst.max(rel.min((got - want).abs()));
                if rel > 1e-9 && (got - want).abs() > 1e-9 * want.abs().max(1.0) {
                    return Err(format!("stream {s}, lag {lag}, function {j}: {got} vs {want}"));
                }
            }
        }
        let standard = standard_estimator(&records).map_err(|e| e.to_string())?;
        if report.ratio(0, 0).unwrap().to_bits() != standard.to_bits() {
            return Err(format!(
                "stream {s}: lag-0 {} vs standard {standard}",
                report.ratio(0, 0).unwrap()
            ));
        }
    }
    Ok(format!(
        "1000 streams, worst relative error {worst:.2e}, lag 0 bit-exact"
    ))
}

fn constant_potential() -> Outcome {
    let expected = (-1.0f64 / 32.0).exp();
    let model = GuidedHarmonicOscillator::new(0.0625, 1.0, KernelMode::ExactOu, GaussianInit::default())
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for walkers in [1usize, 10] {
        for windows in [10u64, 1000] {
            for lag in [0usize, 5, 50] {
                let obs = [Observable::Potential];
                let stream = RngStream::trajectory(31, walkers as u64 * 10_000 + windows + lag as u64);
                let mut trajectory = Trajectory::new(&model, walkers, stream, &obs).map_err(|e| e.to_string())?;
                let records = trajectory
                    .collect_records(windows as usize + lag)
                    .map_err(|e| e.to_string())?;
                let mut acc = LaggedAccumulator::new(&[lag], 1, Some(windows)).map_err(|e| e.to_string())?;
                acc.record_all(&records).map_err(|e| e.to_string())?;
                let got = acc.finalize().map_err(|e| e.to_string())?.ratio(lag, 0).unwrap();
                worst = worst.max((got - expected).abs());
                if (got - expected).abs() > 1e-12 {
                    return Err(format!("N={walkers} n={windows} l={lag}: {got:.17} vs {expected:.17}"));
                }
            }
        }
    }
    Ok(format!("12 settings, worst deviation {worst:.1e} from {expected:.10}"))
}

const BENCHMARK_LAGS: [usize; 11] = [0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

/// The benchmark-scale oscillator experiment, shared by the bias and variance
/// criteria. Lag 1 rides along on the same trajectories for the variance
/// comparison; it does not change any other lag's estimate.
fn benchmark_run() -> &'static Result<ExperimentOutcome, String> {
    static RUN: OnceLock<Result<ExperimentOutcome, String>> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut lags = BENCHMARK_LAGS.to_vec();
        lags.push(1);
        let config = ExperimentConfig {
            lags,
            variance_compare: true,
            ..benchmark_config()
        };
        run_experiment(&config, None).map_err(|e| e.to_string())
    })
}

fn benchmark_config() -> ExperimentConfig {
    let text = include_str!("../../../configs/benchmark_ho.json");
    ExperimentConfig::from_json(text).expect("shipped config parses")
}

fn restrict(report: &ReplicationReport, lags: &[usize]) -> ReplicationReport {
    let keep: Vec<usize> = lags
        .iter()
        .map(|l| report.lags.iter().position(|x| x == l).expect("lag present"))
        .collect();
    ReplicationReport {
        lags: lags.to_vec(),
        estimates: keep.iter().map(|&i| report.estimates[i].clone()).collect(),
        independent: report
            .independent
            .as_ref()
            .map(|v| keep.iter().map(|&i| v[i]).collect()),
        batch_se: keep.iter().map(|&i| report.batch_se[i]).collect(),
        ..report.clone()
    }
}

fn oscillator_bias_trend() -> Outcome {
    let outcome = benchmark_run().as_ref().map_err(|e| e.clone())?;
    let reports: Vec<_> = outcome.reports.iter().map(|r| restrict(r, &BENCHMARK_LAGS)).collect();
    let agg: AggregateReport =
        aggregate(&reports, outcome.reference.as_ref(), &FitRange::default()).map_err(|e| e.to_string())?;
    let r0 = agg.row(0).unwrap();
    let r20 = agg.row(20).unwrap();
    let (b0, b20) = (r0.abs_bias.unwrap(), r20.abs_bias.unwrap());
    let lower0 = b0 - 3.0 * r0.se_mean;
    let upper20 = b20 + 3.0 * r20.se_mean;
    if lower0 <= upper20 {
        return Err(format!(
            "lag 0 |bias| {b0:.3e}±3·{:.1e} overlaps lag 20 {b20:.3e}±3·{:.1e}",
            r0.se_mean, r20.se_mean
        ));
    }
    let fit = agg
        .fit
        .as_ref()
        .ok_or_else(|| agg.fit_note.clone().unwrap_or_default())?;
    let se = fit.slope_se();
    if fit.slope + 3.0 * se >= 0.0 {
        return Err(format!("slope {:.4} ± {se:.4} not negative at 3σ", fit.slope));
    }
    Ok(format!(
        "|bias| lag0 {b0:.3e} vs lag20 {b20:.3e}; slope {:.4} ± {se:.4} over lags {:?}; {:.1}s",
        fit.slope, fit.fit_lags, outcome.wall_seconds
    ))
}

fn oscillator_variance_trend() -> Outcome {
    let outcome = benchmark_run().as_ref().map_err(|e| e.clone())?;
    let reports = &outcome.reports;
    let df = (reports.len() - 1) as f64;
    let column = |lag: usize, independent: bool| -> Vec<f64> {
        reports
            .iter()
            .map(|r| {
                let i = r.lags.iter().position(|&x| x == lag).unwrap();
                if independent {
                    r.independent.as_ref().unwrap()[i]
                } else {
                    r.estimates[i][r.g_index]
                }
            })
            .collect()
    };
    let mut worst_p = 0.0f64;
    for &lag in BENCHMARK_LAGS.iter().filter(|&&l| l >= 1) {
        let joint = sample_variance(&column(lag, false));
        let independent = sample_variance(&column(lag, true));
        let p = f_test_greater(independent, df, joint, df);
        worst_p = worst_p.max(p);
        if p >= 1e-3 {
            return Err(format!(
                "lag {lag}: Var(indep) {independent:.3e} vs Var(joint) {joint:.3e}, p={p:.2e}"
            ));
        }
    }
    let v1 = sample_variance(&column(1, false));
    let v50 = sample_variance(&column(50, false));
    if v50 <= v1 {
        return Err(format!(
            "Var(μ̃) > Var(μ̄) at every lag ≥ 5 (worst p {worst_p:.1e}), but Var(μ̄) lag 50 {v50:.3e} <= lag 1 {v1:.3e}"
        ));
    }
    Ok(format!(
        "worst F-test p {worst_p:.1e}; Var(μ̄) lag 1 {v1:.3e} < lag 50 {v50:.3e}"
    ))
}

fn finite_config(walkers: usize, windows: u64, lags: Vec<usize>, replications: usize, seed: u64) -> ExperimentConfig {
    let text = format!(
        r#"{{"model": {{"kind": "finite", "M": [[0.7, 0.3], [0.4, 0.6]], "G": [1.0, 0.5], "eta0": [0.5, 0.5]}},
            "walkers": {walkers}, "windows": {windows}, "lags": {lags:?}, "replications": {replications},
            "master_seed": {seed}}}"#
    );
    ExperimentConfig::from_json(&text).expect("valid finite config")
}

fn finite_bias() -> Outcome {
    let config = finite_config(5, 100_000, vec![0, 15], 64, 8101);
    let lambda = reference_value(&config.model).map_err(|e| e.to_string())?.value;
    if (lambda - 0.8162278).abs() > 1e-7 {
        return Err(format!("reference λ = {lambda}"));
    }
    let outcome = run_experiment(&config, None).map_err(|e| e.to_string())?;
    let r0 = outcome.aggregate.row(0).unwrap();
    let r15 = outcome.aggregate.row(15).unwrap();
    let z0 = (r0.mean_estimate - lambda) / r0.se_mean;
    let z15 = (r15.mean_estimate - lambda) / r15.se_mean;
    if z0.abs() <= 3.0 {
        return Err(format!("lag 0 only {z0:.2} SE from λ"));
    }
    if z15.abs() > 3.0 {
        return Err(format!("lag 15 is {z15:.2} SE from λ"));
    }
    Ok(format!("λ={lambda:.7}; lag 0 z={z0:+.1}, lag 15 z={z15:+.2}"))
}

fn clt_sanity() -> Outcome {
    let config = finite_config(5, 10_000, vec![5], 256, 9090);
    let outcome = run_experiment(&config, None).map_err(|e| e.to_string())?;
    let estimates: Vec<f64> = outcome.reports.iter().map(|r| r.estimates[0][r.g_index]).collect();
    let centre = mean(&estimates);
    let z: Vec<f64> = outcome
        .reports
        .iter()
        .zip(&estimates)
        .map(|(r, e)| (e - centre) / r.batch_se[0])
        .collect();
    let var = sample_variance(&z);
    let (jb, p) = jarque_bera(&z);
    if !(0.6..=1.6).contains(&var) {
        return Err(format!("variance of normalized errors {var:.3}"));
    }
    if p <= 1e-3 {
        return Err(format!("Jarque-Bera {jb:.2}, p={p:.2e}"));
    }
    Ok(format!(
        "normalized error variance {var:.3}; Jarque-Bera {jb:.2} (p={p:.3})"
    ))
}

fn determinism() -> Outcome {
    let config = ExperimentConfig {
        model: ModelSpec::HarmonicOscillator(HarmonicOscillator::default()),
        walkers: 6,
        windows: 2000,
        lags: vec![0, 3, 6],
        replications: 6,
        master_seed: 4242,
        variance_compare: true,
        ..benchmark_config()
    };
    let mut rendered = Vec::new();
    for workers in [1usize, 3, 4] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let outcome = run_experiment(&config, Some(workers)).map_err(|e| e.to_string())?;
        let runtime = RuntimeInfo {
            wall_seconds: outcome.wall_seconds,
            workers,
            output_dir: dir.path().to_path_buf(),
            replication_seconds: outcome.reports.iter().map(|r| r.runtime_seconds).collect(),
        };
        let files = write_outputs(dir.path(), &config, &outcome, &runtime).map_err(|e| e.to_string())?;
        let bias = std::fs::read(&files.bias_csv).map_err(|e| e.to_string())?;
        let variance = std::fs::read(&files.variance_csv).map_err(|e| e.to_string())?;
        rendered.push((workers, bias, variance));
    }
    let (_, b, v) = &rendered[0];
    for (workers, bias, variance) in &rendered[1..] {
        if bias != b || variance != v {
            return Err(format!("outputs with {workers} workers differ from 1 worker"));
        }
    }
    Ok("bias.csv and variance.csv identical for 1, 3 and 4 workers".into())
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "oracle identities",
            budget: Duration::from_secs(1),
            run: oracle_identities,
        },
        Criterion {
            name: "exact unbiasedness",
            budget: Duration::from_secs(120),
            run: exact_unbiasedness,
        },
        Criterion {
            name: "streaming equivalence",
            budget: Duration::from_secs(10),
            run: streaming_equivalence,
        },
        Criterion {
            name: "constant-potential exactness",
            budget: Duration::from_secs(5),
            run: constant_potential,
        },
        Criterion {
            name: "oscillator bias trend",
            budget: Duration::from_secs(1800),
            run: oscillator_bias_trend,
        },
        Criterion {
            name: "oscillator variance trend",
            budget: Duration::from_secs(1800),
            run: oscillator_variance_trend,
        },
        Criterion {
            name: "finite-model end-to-end bias",
            budget: Duration::from_secs(300),
            run: finite_bias,
        },
        Criterion {
            name: "CLT sanity",
            budget: Duration::from_secs(600),
            run: clt_sanity,
        },
        Criterion {
            name: "determinism across worker counts",
            budget: Duration::from_secs(600),
            run: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let started = Instant::now();
        let result = (c.run)();
        let elapsed = started.elapsed();
        let result = match result {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; took {elapsed:.1?}, budget {:?}", c.budget)),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS  {:<34} {detail} [{elapsed:.2?}]", c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:<34} {detail} [{elapsed:.2?}]", c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
