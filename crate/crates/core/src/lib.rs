//! Diffusion Monte Carlo with fixed-lag Feynman-Kac eigenvalue estimators.
//!
//! The crate is organised bottom-up:
//!
//! - [`finite`]: exact semigroup mathematics on finite state spaces, used as
//!   the oracle for everything stochastic.
//! - [`dmc`]: the N-walker selection/mutation particle system.
//! - [`models`]: the harmonic oscillator, its importance-sampled variant and
//!   an adapter that runs any finite model through the engine.
//! - [`estimators`]: streaming fixed-lag, standard and independent-ratio
//!   estimators plus batch-means variances.
//! - [`experiments`]: replicated runs, aggregation, bias-decay fits and the
//!   CSV/JSON outputs.
//! - [`checks`]: oracle and unbiasedness self-checks on finite models.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod dmc;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod finite;
pub mod format;
pub mod models;
pub mod rng;
pub mod summation;

pub use dmc::{Observable, Population, SimulatableFkModel, Trajectory};
pub use error::{Error, Result};
pub use estimators::{EstimateReport, LaggedAccumulator, StepRecord};
pub use finite::{Eigentriple, FiniteFkModel, MeasureVector};
pub use rng::{RngStream, StreamRole};
