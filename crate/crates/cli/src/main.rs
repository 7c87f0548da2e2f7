//! `lagdmc`: run lagged-estimator sweeps and model self-checks from JSON configs.
//!
//! Exit codes: 0 on success, 1 when a check fails or a run errors, 2 when the
//! configuration is invalid.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lagdmc_core::checks::{oracle_check, unbiasedness_check, OracleCheckConfig, UnbiasednessConfig};
use lagdmc_core::experiments::{run_experiment, write_outputs, ExperimentConfig, ExperimentOutcome, RuntimeInfo};
use lagdmc_core::format::sig17;
use lagdmc_core::Error;

#[derive(Parser)]
#[command(
    name = "lagdmc",
    version,
    about = "Fixed-lag Feynman-Kac eigenvalue estimation on a DMC engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bias of the lagged estimator against the reference eigenvalue, per lag.
    BiasSweep(RunArgs),
    /// Bias sweep plus the independent-copies ratio for variance comparison.
    VarianceCompare(RunArgs),
    /// Eigen, fixed-point and semigroup identities of a finite model.
    OracleCheck(CheckArgs),
    /// Exact enumeration and engine Monte Carlo of the unnormalized mass.
    UnbiasednessCheck(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `output_dir`; default `results`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: config value, else all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Print the aggregate as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed` (unbiasedness check only).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
    CheckFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_configuration() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn read_config(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn print_table(outcome: &ExperimentOutcome) {
    match &outcome.reference {
        Some(r) => println!("reference λ = {}  ({})", sig17(r.value), r.provenance),
        None => println!("no reference value"),
    }
    println!(
        "{:>5}  {:>22}  {:>12}  {:>11}  {:>11}  {:>11}",
        "lag", "mean", "|bias|", "se", "var", "var indep"
    );
    for r in &outcome.aggregate.rows {
        let bias = r.abs_bias.map_or("-".to_string(), |b| format!("{b:.4e}"));
        let indep = r.var_independent.map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!(
            "{:>5}  {:>22.15}  {:>12}  {:>11.4e}  {:>11.4e}  {:>11}",
            r.lag, r.mean_estimate, bias, r.se_mean, r.var_joint, indep
        );
    }
    match (&outcome.aggregate.fit, &outcome.aggregate.fit_note) {
        (Some(fit), _) => println!(
            "log|bias| slope {:.6} ± {:.6} over lags {:?} (r² {:.4})",
            fit.slope,
            fit.slope_se(),
            fit.fit_lags,
            fit.r2
        ),
        (None, Some(note)) => println!("no slope fit: {note}"),
        (None, None) => {}
    }
}

fn run(args: RunArgs, variance_compare: bool) -> Result<(), Failure> {
    let mut config = ExperimentConfig::from_json(&read_config(&args.config)?)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if variance_compare {
        config.variance_compare = true;
    }
    if args.workers == Some(0) {
        return Err(Failure::Config("--workers must be >= 1".into()));
    }
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    config.validate()?;

    let outcome = run_experiment(&config, args.workers)?;
    let runtime = RuntimeInfo {
        wall_seconds: outcome.wall_seconds,
        workers: outcome.workers,
        output_dir: out.clone(),
        replication_seconds: outcome.reports.iter().map(|r| r.runtime_seconds).collect(),
    };
    let files = write_outputs(&out, &config, &outcome, &runtime)?;
    if args.json {
        let value = serde_json::json!({
            "aggregate": outcome.aggregate,
            "bias_csv": files.bias_csv,
            "variance_csv": files.variance_csv,
            "fit_json": files.fit_json,
            "meta_json": files.meta_json,
        });
        println!("{}", serde_json::to_string_pretty(&value).map_err(Error::from)?);
    } else {
        print_table(&outcome);
        println!(
            "{} replications on {} worker(s) in {:.2}s; wrote {}",
            outcome.reports.len(),
            outcome.workers,
            outcome.wall_seconds,
            out.display()
        );
    }
    Ok(())
}

fn oracle(args: CheckArgs) -> Result<(), Failure> {
    let config = OracleCheckConfig::from_json(&read_config(&args.config)?)?;
    let report = oracle_check(&config.model, config.tol, config.max_iters, config.max_lag)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    } else {
        println!(
            "λ = {}  ({} iterations, residual {:.3e})",
            sig17(report.eigen.lambda),
            report.eigen.iterations,
            report.eigen.residual
        );
        for c in &report.checks {
            let status = if c.passed { "ok  " } else { "FAIL" };
            println!(
                "{status} {:<48} {:.3e} (tol {:.1e})",
                c.name, c.discrepancy, c.tolerance
            );
        }
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::CheckFailed)
    }
}

fn unbiasedness(args: CheckArgs) -> Result<(), Failure> {
    let mut config = UnbiasednessConfig::from_json(&read_config(&args.config)?)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let report = unbiasedness_check(&config)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    } else {
        println!("N = {}, n = {}, runs = {}", report.walkers, report.steps, report.runs);
        println!("γ_n(1) exact flow   {}", sig17(report.oracle_gamma));
        println!(
            "enumeration         {}  (match: {})",
            sig17(report.enumerated),
            report.enumeration_matches
        );
        println!(
            "engine mean         {} ± {:.3e}  (within {} SE: {})",
            sig17(report.monte_carlo_mean),
            report.monte_carlo_se,
            config.sigma,
            report.monte_carlo_within
        );
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::CheckFailed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BiasSweep(args) => run(args, false),
        Command::VarianceCompare(args) => run(args, true),
        Command::OracleCheck(args) => oracle(args),
        Command::UnbiasednessCheck(args) => unbiasedness(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::CheckFailed) => {
            eprintln!("check failed");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
    }
}
