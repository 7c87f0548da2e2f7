//! The Diffusion Monte Carlo particle system.
//!
//! `N` walkers evolve by selection (multinomial resampling with probability
//! proportional to the potential) followed by mutation (an independent
//! kernel move per walker). Resampling happens at every step.

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimators::StepRecord;
use crate::rng::RngStream;
use crate::summation::KahanSum;

/// A Feynman-Kac model that can be simulated: initial law, Markov kernel
/// and potential on an arbitrary state type.
///
/// Implementations draw randomness only from the `rng` they are handed.
pub trait SimulatableFkModel: Send + Sync {
    type State: Clone + Send + Sync + std::fmt::Debug;

    fn name(&self) -> String;

    fn draw_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self::State>;

    fn kernel_draw<R: Rng + ?Sized>(&self, state: &Self::State, rng: &mut R) -> Result<Self::State>;

    /// `G(x)`; finite and strictly positive on every reachable state.
    fn potential(&self, state: &Self::State) -> f64;
}

/// The walkers at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Population<S> {
    walkers: Vec<S>,
    step_index: u64,
}

impl<S> Population<S> {
    pub fn from_walkers(walkers: Vec<S>, step_index: u64) -> Result<Self> {
        if walkers.is_empty() {
            return Err(Error::InvalidArgument(
                "population must have at least one walker".into(),
            ));
        }
        Ok(Self { walkers, step_index })
    }

    pub fn walkers(&self) -> &[S] {
        &self.walkers
    }

    pub fn len(&self) -> usize {
        self.walkers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walkers.is_empty()
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn into_walkers(self) -> Vec<S> {
        self.walkers
    }
}

/// The selection rule. Only [`Multinomial`] ships with the crate; the trait
/// exists so checks can be run against a deliberately wrong resampler.
pub trait Resampler: Send + Sync {
    /// Returns `weights.len()` parent indices.
    fn resample<R: Rng + ?Sized>(&self, weights: &[f64], rng: &mut R) -> Result<Vec<usize>>;
}

/// N i.i.d. categorical draws with probabilities `w_i / Σ w`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Multinomial;

impl Resampler for Multinomial {
    fn resample<R: Rng + ?Sized>(&self, weights: &[f64], rng: &mut R) -> Result<Vec<usize>> {
        selection(weights, rng)
    }
}

/// Multinomial resampling.
pub fn selection<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    let mut parents = Vec::with_capacity(weights.len());
    selection_into(weights, rng, &mut parents)?;
    Ok(parents)
}

fn selection_into<R: Rng + ?Sized>(weights: &[f64], rng: &mut R, parents: &mut Vec<usize>) -> Result<()> {
    parents.clear();
    let n = weights.len();
    if n == 0 {
        return Ok(());
    }
    let mut cumulative = Vec::with_capacity(n);
    let mut total = 0.0;
    for (index, &value) in weights.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Weight { index, value });
        }
        total += value;
        cumulative.push(total);
    }
    if n == 1 {
        parents.push(0);
        return Ok(());
    }
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        let i = cumulative.partition_point(|&c| c <= u);
        parents.push(i.min(n - 1));
    }
    Ok(())
}

pub fn init_population<M, R>(model: &M, walkers: usize, rng: &mut R) -> Result<Population<M::State>>
where
    M: SimulatableFkModel,
    R: Rng + ?Sized,
{
    if walkers == 0 {
        return Err(Error::InvalidArgument("walker count must be >= 1".into()));
    }
    let walkers = (0..walkers)
        .map(|_| model.draw_initial(rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(Population { walkers, step_index: 0 })
}

/// Moves every parent independently through the kernel.
pub fn mutation<M, R>(model: &M, parents: &[M::State], rng: &mut R) -> Result<Vec<M::State>>
where
    M: SimulatableFkModel,
    R: Rng + ?Sized,
{
    parents.iter().map(|x| model.kernel_draw(x, rng)).collect()
}

/// One selection/mutation transition with multinomial resampling.
pub fn step<M, R>(model: &M, population: Population<M::State>, rng: &mut R) -> Result<Population<M::State>>
where
    M: SimulatableFkModel,
    R: Rng + ?Sized,
{
    step_with(model, &Multinomial, population, rng)
}

pub fn step_with<M, S, R>(
    model: &M,
    resampler: &S,
    population: Population<M::State>,
    rng: &mut R,
) -> Result<Population<M::State>>
where
    M: SimulatableFkModel,
    S: Resampler + ?Sized,
    R: Rng + ?Sized,
{
    let weights: Vec<f64> = population.walkers.iter().map(|x| model.potential(x)).collect();
    let parents = resampler.resample(&weights, rng)?;
    let selected: Vec<M::State> = parents.iter().map(|&i| population.walkers[i].clone()).collect();
    Ok(Population {
        walkers: mutation(model, &selected, rng)?,
        step_index: population.step_index + 1,
    })
}

/// A function of one walker state, averaged over the population to give `η^N_p(φ)`.
pub enum Observable<S> {
    /// `φ = G`; copied from the record's `g` so the two agree bit-for-bit.
    Potential,
    /// `φ = 1`.
    One,
    Function(Box<dyn Fn(&S) -> f64 + Send + Sync>),
}

impl<S> Observable<S> {
    pub fn function(f: impl Fn(&S) -> f64 + Send + Sync + 'static) -> Self {
        Observable::Function(Box::new(f))
    }
}

impl<S> std::fmt::Debug for Observable<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Observable::Potential => f.write_str("Potential"),
            Observable::One => f.write_str("One"),
            Observable::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// A single particle trajectory driven by one RNG stream.
///
/// Each call to [`Trajectory::next_record`] observes the current population
/// and then advances it by one step, so records come out in step order.
pub struct Trajectory<'a, M: SimulatableFkModel, S: Resampler + ?Sized = Multinomial> {
    model: &'a M,
    resampler: &'a S,
    observables: &'a [Observable<M::State>],
    walkers: Vec<M::State>,
    step_index: u64,
    rng: crate::rng::StreamRng,
    weights: Vec<f64>,
    parents: Vec<usize>,
}

impl<'a, M: SimulatableFkModel> Trajectory<'a, M> {
    pub fn new(
        model: &'a M,
        walkers: usize,
        stream: RngStream,
        observables: &'a [Observable<M::State>],
    ) -> Result<Self> {
        Trajectory::with_resampler(model, &Multinomial, walkers, stream, observables)
    }
}

impl<'a, M: SimulatableFkModel, S: Resampler + ?Sized> Trajectory<'a, M, S> {
    pub fn with_resampler(
        model: &'a M,
        resampler: &'a S,
        walkers: usize,
        stream: RngStream,
        observables: &'a [Observable<M::State>],
    ) -> Result<Self> {
        let mut rng = stream.rng();
        let population = init_population(model, walkers, &mut rng)?;
        Ok(Self {
            model,
            resampler,
            observables,
            walkers: population.walkers,
            step_index: 0,
            rng,
            weights: Vec::with_capacity(walkers),
            parents: Vec::with_capacity(walkers),
        })
    }

    pub fn population(&self) -> Population<M::State> {
        Population {
            walkers: self.walkers.clone(),
            step_index: self.step_index,
        }
    }

    /// Record of the current population, then one selection/mutation step.
    pub fn next_record(&mut self) -> Result<StepRecord> {
        let record = self.observe();
        self.advance()?;
        Ok(record)
    }

    /// `StepRecord` for the current population; leaves the potentials in
    /// the weight buffer for the following selection.
    fn observe(&mut self) -> StepRecord {
        self.weights.clear();
        self.weights
            .extend(self.walkers.iter().map(|x| self.model.potential(x)));
        let n = self.walkers.len() as f64;
        let g = self.weights.iter().collect::<KahanSum>().value() / n;
        let f = self
            .observables
            .iter()
            .map(|obs| match obs {
                Observable::Potential => g,
                Observable::One => 1.0,
                Observable::Function(phi) => self.walkers.iter().map(phi).collect::<KahanSum>().value() / n,
            })
            .collect();
        StepRecord {
            step: self.step_index,
            g,
            f,
        }
    }

    fn advance(&mut self) -> Result<()> {
        let parents = self.resampler.resample(&self.weights, &mut self.rng)?;
        self.parents = parents;
        let mut next = Vec::with_capacity(self.walkers.len());
        for &i in &self.parents {
            next.push(self.model.kernel_draw(&self.walkers[i], &mut self.rng)?);
        }
        self.walkers = next;
        self.step_index += 1;
        Ok(())
    }

    /// Streams `count` consecutive records into `sink`.
    pub fn run(&mut self, count: usize, mut sink: impl FnMut(StepRecord) -> Result<()>) -> Result<()> {
        for _ in 0..count {
            let rec = self.next_record()?;
            sink(rec)?;
        }
        Ok(())
    }

    pub fn collect_records(&mut self, count: usize) -> Result<Vec<StepRecord>> {
        let mut out = Vec::with_capacity(count);
        self.run(count, |r| {
            out.push(r);
            Ok(())
        })?;
        Ok(out)
    }
}
