//! Exact law of the N-walker particle system by brute-force enumeration.
//!
//! One transition draws each walker independently from `Φ(m(ξ))`, where
//! `m(ξ)` is the empirical measure of the current walkers. For tiny models
//! every trajectory `(ξ_0, …, ξ_n)` can be listed with its probability,
//! which gives exact expectations of any path functional.

use super::model::FiniteFkModel;
use crate::error::{Error, Result};
use crate::summation::KahanSum;

/// Largest number of trajectories [`exact_particle_expectation`] will visit.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// One complete trajectory of the particle system.
#[derive(Debug, Clone, Copy)]
pub struct ParticlePath<'a> {
    model: &'a FiniteFkModel,
    configurations: &'a [Vec<usize>],
}

impl<'a> ParticlePath<'a> {
    pub fn new(model: &'a FiniteFkModel, configurations: &'a [Vec<usize>]) -> Self {
        Self { model, configurations }
    }

    /// Walker states at step `p`.
    pub fn at(&self, p: usize) -> &[usize] {
        &self.configurations[p]
    }

    pub fn final_step(&self) -> usize {
        self.configurations.len() - 1
    }

    /// `m(ξ_p)(φ)`.
    pub fn empirical(&self, p: usize, phi: &[f64]) -> f64 {
        let walkers = self.at(p);
        walkers.iter().map(|&x| phi[x]).sum::<f64>() / walkers.len() as f64
    }

    /// `γ^N_p(φ) = m(ξ_p)(φ) ∏_{q<p} m(ξ_q)(G)`.
    pub fn unnormalized(&self, p: usize, phi: &[f64]) -> f64 {
        let g = self.model.potential();
        (0..p).map(|q| self.empirical(q, g)).product::<f64>() * self.empirical(p, phi)
    }
}

/// Common statistics of the final step `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum PathStatistic {
    /// `γ^N_n(φ)`.
    Unnormalized(Vec<f64>),
    /// `η^N_n(φ)`.
    Empirical(Vec<f64>),
}

impl PathStatistic {
    pub fn evaluate(&self, path: &ParticlePath<'_>) -> f64 {
        let n = path.final_step();
        match self {
            PathStatistic::Unnormalized(phi) => path.unnormalized(n, phi),
            PathStatistic::Empirical(phi) => path.empirical(n, phi),
        }
    }
}

/// Exact `E[statistic(ξ_0, …, ξ_n)]` for `walkers` particles over `steps` transitions.
pub fn exact_particle_expectation<F>(model: &FiniteFkModel, walkers: usize, steps: usize, statistic: F) -> Result<f64>
where
    F: Fn(&ParticlePath<'_>) -> f64,
{
    if walkers == 0 {
        return Err(Error::InvalidArgument("walker count must be >= 1".into()));
    }
    let d = model.dim();
    let configurations = (d as f64).powf((walkers * (steps + 1)) as f64);
    if configurations > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            configurations,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut walk = Enumerator {
        model,
        walkers,
        steps,
        path: Vec::with_capacity(steps + 1),
        total: KahanSum::new(),
        statistic: &statistic,
    };
    walk.descend(model.initial().to_vec(), 1.0);
    Ok(walk.total.value())
}

/// Convenience wrapper for the built-in statistics.
pub fn expectation_of(model: &FiniteFkModel, walkers: usize, steps: usize, statistic: &PathStatistic) -> Result<f64> {
    exact_particle_expectation(model, walkers, steps, |p| statistic.evaluate(p))
}

struct Enumerator<'m, F> {
    model: &'m FiniteFkModel,
    walkers: usize,
    steps: usize,
    path: Vec<Vec<usize>>,
    total: KahanSum,
    statistic: &'m F,
}

impl<F> Enumerator<'_, F>
where
    F: Fn(&ParticlePath<'_>) -> f64,
{
    /// Visits every configuration of the next level drawn i.i.d. from `law`.
    fn descend(&mut self, law: Vec<f64>, weight: f64) {
        let d = self.model.dim();
        let mut config = vec![0usize; self.walkers];
        loop {
            let p: f64 = config.iter().map(|&x| law[x]).product();
            if p > 0.0 {
                self.path.push(config.clone());
                let w = weight * p;
                if self.path.len() == self.steps + 1 {
                    let path = ParticlePath::new(self.model, &self.path);
                    self.total.add(w * (self.statistic)(&path));
                } else {
                    let next = self.selection_mutation_law(&config);
                    self.descend(next, w);
                }
                self.path.pop();
            }
            // mixed-radix increment
            let mut i = 0;
            loop {
                if i == self.walkers {
                    return;
                }
                config[i] += 1;
                if config[i] < d {
                    break;
                }
                config[i] = 0;
                i += 1;
            }
        }
    }

    /// `Φ(m(ξ))` for the walker configuration `ξ`.
    fn selection_mutation_law(&self, config: &[usize]) -> Vec<f64> {
        let g = self.model.potential();
        let total: f64 = config.iter().map(|&x| g[x]).sum();
        let mut law = vec![0.0; self.model.dim()];
        for &x in config {
            let w = g[x] / total;
            for (acc, m) in law.iter_mut().zip(self.model.row(x)) {
                *acc += w * m;
            }
        }
        law
    }
}
