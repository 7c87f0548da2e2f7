//! Self-checks on finite models: semigroup identities of the exact oracle,
//! and unbiasedness of the particle system's unnormalized mass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dmc::{init_population, step_with, Multinomial, Resampler, SimulatableFkModel};
use crate::error::{Error, Result};
use crate::finite::{
    expectation_of, Eigentriple, FiniteFkModel, MeasureVector, PathStatistic, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
use crate::format::serialize_sig17;
use crate::models::FiniteAdapter;
use crate::rng::RngStream;
use crate::summation::KahanSum;

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

fn default_max_lag() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckConfig {
    pub model: FiniteFkModel,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Largest lag used by the semigroup and eigen-consistency identities.
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
}

impl OracleCheckConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::validation("config", e.to_string()))?;
        if !(cfg.tol > 0.0) {
            return Err(Error::validation("tol", "must be > 0"));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Worst observed discrepancy.
    #[serde(serialize_with = "serialize_sig17")]
    pub discrepancy: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, discrepancy: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            discrepancy,
            tolerance,
            passed: discrepancy <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub eigen: Eigentriple,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

impl OracleReport {
    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `Φ^a(μ)` as a measure, by `a` applications of `Φ`.
fn push_forward(model: &FiniteFkModel, mu: &MeasureVector, steps: usize) -> Result<MeasureVector> {
    let mut eta = mu.clone();
    for _ in 0..steps {
        eta = model.phi_map(&eta)?;
    }
    Ok(eta)
}

/// Runs the eigen, fixed-point, semigroup and eigen-consistency identities.
pub fn oracle_check(model: &FiniteFkModel, tol: f64, max_iters: usize, max_lag: usize) -> Result<OracleReport> {
    let eigen = model.power_iteration(tol, max_iters)?;
    let lambda = eigen.lambda;
    let g = model.potential();
    let mut checks = vec![
        IdentityCheck::new("eigen residual max(|Qh - λh|∞, |η∞Q - λη∞|₁)", eigen.residual, 1e-10),
        IdentityCheck::new("η∞(G) = λ", (eigen.eta_inf.integrate(g)? - lambda).abs(), 1e-10),
        IdentityCheck::new(
            "fixed point |Φ(η∞) - η∞|₁",
            model.phi_map(&eigen.eta_inf)?.l1_distance(&eigen.eta_inf),
            10.0 * tol,
        ),
    ];

    // Φ^{a+b}(μ)(φ) = Φ^b(Φ^a(μ))(φ) from the initial law and the uniform law,
    // for φ = G and each basis vector.
    let d = model.dim();
    let mut phis = vec![g.to_vec()];
    for i in 0..d.min(8) {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        phis.push(e);
    }
    let uniform = MeasureVector::probability(vec![1.0 / d as f64; d])
        .or_else(|_| MeasureVector::new(vec![1.0; d])?.normalize())?;
    let half = max_lag.div_ceil(2);
    let mut semigroup = 0.0f64;
    for mu in [model.initial_measure(), uniform] {
        for a in 0..=half {
            let pushed = push_forward(model, &mu, a)?;
            for b in 0..=half {
                for phi in &phis {
                    let direct = model.lag_limit(&mu, a + b, phi)?;
                    let composed = model.lag_limit(&pushed, b, phi)?;
                    semigroup = semigroup.max((direct - composed).abs());
                }
            }
        }
    }
    checks.push(IdentityCheck::new("semigroup Φ^(a+b) = Φ^b ∘ Φ^a", semigroup, 1e-10));

    // η∞ Q^l(φ) = λ^l η∞(φ), relative to the magnitude of the right side.
    let mut eigen_consistency = 0.0f64;
    for phi in &phis {
        let mut q_phi = phi.clone();
        let base = eigen.eta_inf.integrate(phi)?;
        for l in 0..=max_lag {
            let lhs = eigen.eta_inf.integrate(&q_phi)?;
            let rhs = lambda.powi(l as i32) * base;
            eigen_consistency = eigen_consistency.max((lhs - rhs).abs() / rhs.abs().max(1.0));
            q_phi = model.q_apply(&q_phi)?;
        }
    }
    checks.push(IdentityCheck::new("η∞Q^l(φ) = λ^l η∞(φ)", eigen_consistency, 1e-8));

    let mut lag_limit_at_fixed_point = 0.0f64;
    let mut normalization = 0.0f64;
    let ones = vec![1.0; d];
    for l in 0..=max_lag {
        lag_limit_at_fixed_point =
            lag_limit_at_fixed_point.max((model.lag_limit(&eigen.eta_inf, l, g)? - lambda).abs());
        normalization = normalization.max((model.lag_limit(&model.initial_measure(), l, &ones)? - 1.0).abs());
    }
    checks.push(IdentityCheck::new("Φ^l(η∞)(G) = λ", lag_limit_at_fixed_point, 1e-10));
    checks.push(IdentityCheck::new("Φ^l(μ)(1) = 1", normalization, 0.0));

    let passed = checks.iter().all(|c| c.passed);
    Ok(OracleReport { eigen, checks, passed })
}

fn default_walkers() -> usize {
    2
}

fn default_steps() -> usize {
    2
}

fn default_runs() -> u64 {
    1_000_000
}

fn default_sigma() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnbiasednessConfig {
    pub model: FiniteFkModel,
    #[serde(default = "default_walkers", alias = "N")]
    pub walkers: usize,
    #[serde(default = "default_steps", alias = "n")]
    pub steps: usize,
    /// Independent engine runs for the Monte Carlo mean.
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// Allowed distance of the Monte Carlo mean, in standard errors.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

impl UnbiasednessConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::validation("config", e.to_string()))?;
        if cfg.walkers == 0 {
            return Err(Error::validation("walkers", "N must be >= 1"));
        }
        if cfg.runs < 2 {
            return Err(Error::validation("runs", "must be >= 2"));
        }
        if !(cfg.sigma > 0.0) {
            return Err(Error::validation("sigma", "must be > 0"));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessReport {
    pub walkers: usize,
    pub steps: usize,
    /// `γ_n(1)` from the exact flow.
    #[serde(serialize_with = "serialize_sig17")]
    pub oracle_gamma: f64,
    /// `E[γ^N_n(1)]` by enumeration of the particle system.
    #[serde(serialize_with = "serialize_sig17")]
    pub enumerated: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub monte_carlo_mean: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub monte_carlo_se: f64,
    pub runs: u64,
    pub enumeration_matches: bool,
    pub monte_carlo_within: bool,
    pub passed: bool,
}

/// Sample of `γ^N_n(1) = ∏_{p<n} η^N_p(G)` from one engine run.
fn sample_unnormalized_mass<S: Resampler + ?Sized, R: Rng + ?Sized>(
    model: &FiniteAdapter,
    resampler: &S,
    walkers: usize,
    steps: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut pop = init_population(model, walkers, rng)?;
    let mut mass = 1.0;
    for _ in 0..steps {
        let g: f64 = pop.walkers().iter().map(|x| model.potential(x)).sum::<f64>() / walkers as f64;
        mass *= g;
        pop = step_with(model, resampler, pop, rng)?;
    }
    Ok(mass)
}

pub fn unbiasedness_check(config: &UnbiasednessConfig) -> Result<UnbiasednessReport> {
    unbiasedness_check_with(config, &Multinomial)
}

/// Exact enumeration vs. the exact flow (to 1e-12) and vs. the engine's
/// Monte Carlo mean (within `sigma` standard errors), with a pluggable
/// resampler for negative controls.
pub fn unbiasedness_check_with<S: Resampler + ?Sized>(
    config: &UnbiasednessConfig,
    resampler: &S,
) -> Result<UnbiasednessReport> {
    let model = &config.model;
    let oracle_gamma = model.log_gamma_mass(config.steps)?.exp();
    let enumerated = expectation_of(
        model,
        config.walkers,
        config.steps,
        &PathStatistic::Unnormalized(vec![1.0; model.dim()]),
    )?;
    let enumeration_matches = (enumerated - oracle_gamma).abs() <= 1e-12;

    let adapter = FiniteAdapter::new(model.clone());
    let mut rng = RngStream::trajectory(config.master_seed, 0).rng();
    let (mut sum, mut sum_sq) = (KahanSum::new(), KahanSum::new());
    for _ in 0..config.runs {
        let v = sample_unnormalized_mass(&adapter, resampler, config.walkers, config.steps, &mut rng)?;
        sum.add(v);
        sum_sq.add(v * v);
    }
    let runs = config.runs as f64;
    let mean = sum.value() / runs;
    let var = ((sum_sq.value() - runs * mean * mean) / (runs - 1.0)).max(0.0);
    let se = (var / runs).sqrt();
    let monte_carlo_within = if se > 0.0 {
        (mean - enumerated).abs() <= config.sigma * se
    } else {
        (mean - enumerated).abs() <= 1e-12
    };
    Ok(UnbiasednessReport {
        walkers: config.walkers,
        steps: config.steps,
        oracle_gamma,
        enumerated,
        monte_carlo_mean: mean,
        monte_carlo_se: se,
        runs: config.runs,
        enumeration_matches,
        monte_carlo_within,
        passed: enumeration_matches && monte_carlo_within,
    })
}
