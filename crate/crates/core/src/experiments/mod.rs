//! Replicated experiments: independent trajectories run in parallel,
//! aggregated into per-lag bias and variance tables with a fit of the
//! bias decay.

mod aggregate;
mod config;
mod output;
mod reference;
mod replication;
pub mod stats;

pub use aggregate::{aggregate, AggregateReport, BiasFit, FitRange, FunctionSummary, LagSummary};
pub use config::{ExperimentConfig, ModelSpec, TestFunctionSpec};
pub use output::{write_outputs, OutputFiles, RuntimeInfo};
pub use reference::{reference_value, Reference};
pub use replication::{run_experiment, run_replication, run_replication_records, ExperimentOutcome, ReplicationReport};
