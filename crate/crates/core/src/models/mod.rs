//! Concrete simulatable models.

mod finite_adapter;
mod guided;
mod harmonic;

pub use finite_adapter::FiniteAdapter;
pub use guided::{GuidedHarmonicOscillator, KernelMode};
pub use harmonic::{GaussianInit, HarmonicOscillator, DEFAULT_TAU};
