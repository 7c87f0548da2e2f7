//! Exact Feynman-Kac mathematics on finite state spaces.
//!
//! Everything stochastic in this crate is checked against the routines here:
//! the linear operator `Q(x, y) = G(x) M(x, y)`, the nonlinear flow
//! `Φ(η) = ηQ / ηQ(1)`, its `l`-fold lag limit, the dominant eigentriple of
//! `Q`, and exact enumeration of the N-walker particle system on tiny models.

mod eigen;
mod enumeration;
mod model;

pub use eigen::{Eigentriple, DEFAULT_MAX_ITERS, DEFAULT_TOL};
pub use enumeration::{exact_particle_expectation, expectation_of, ParticlePath, PathStatistic, ENUMERATION_LIMIT};
pub use model::{EtaStep, FiniteFkModel, MeasureVector};
