//! Shared fixtures for the benchmarks.

use lagdmc_core::estimators::StepRecord;
use lagdmc_core::models::HarmonicOscillator;
use lagdmc_core::{FiniteFkModel, Observable, RngStream, Trajectory};

/// Records from one oscillator trajectory with `G` as the only test function.
pub fn oscillator_records(walkers: usize, count: usize, seed: u64) -> Vec<StepRecord> {
    let model = HarmonicOscillator::default();
    let obs = [Observable::Potential];
    let mut trajectory =
        Trajectory::new(&model, walkers, RngStream::trajectory(seed, 0), &obs).expect("valid trajectory");
    trajectory.collect_records(count).expect("simulation succeeds")
}

/// A dense `d`-state model with a strictly positive kernel.
pub fn dense_model(d: usize) -> FiniteFkModel {
    let rows = (0..d)
        .map(|i| {
            let raw: Vec<f64> = (0..d).map(|j| 1.0 + ((i * 7 + j * 3) % 5) as f64).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect();
    let g = (0..d).map(|i| 0.2 + 0.8 * (i as f64 + 1.0) / d as f64).collect();
    FiniteFkModel::new(rows, g, vec![1.0 / d as f64; d]).expect("valid model")
}
