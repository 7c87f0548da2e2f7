//! Estimators computed from a stream of per-step population summaries.
//!
//! Every estimator here is a function of the [`StepRecord`] stream alone:
//! `g_p = η^N_p(G)` and `f_p[j] = η^N_p(φ_j)`. The fixed-lag window over
//! steps `k..=k+l` contributes
//!
//! ```text
//! F_φ(k, l) = f_{k+l} · ∏_{p=k}^{k+l−1} g_p        F_1(k, l) = ∏_{p=k}^{k+l−1} g_p
//! ```
//!
//! and the fixed-lag estimate is `Σ_k F_φ / Σ_k F_1` over `n` windows.

mod batch_means;
mod lagged;
mod record;

pub use batch_means::{batch_means_variance, default_batch_count, window_values, BatchMeans};
pub use lagged::{independent_ratio, standard_estimator, EstimateReport, LaggedAccumulator};
pub use record::{read_records_csv, write_records_csv, StepRecord};
