use serde::{Deserialize, Serialize};

use super::model::{FiniteFkModel, MeasureVector};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Dominant eigentriple of `Q`: `Qh = λh`, `η∞Q = λη∞`, `η∞(G) = λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigentriple {
    pub lambda: f64,
    /// Right eigenfunction, sup-norm 1.
    pub h: Vec<f64>,
    /// Left eigenvector as a probability vector.
    pub eta_inf: MeasureVector,
    /// `max(‖Qh − λh‖∞, ‖η∞Q − λη∞‖₁)` at the returned iterate.
    pub residual: f64,
    pub iterations: usize,
}

impl FiniteFkModel {
    /// Simultaneous left/right power iteration on `Q`.
    ///
    /// `h` is renormalized to unit sup-norm and `η` to unit mass every sweep;
    /// iteration stops once both successive-iterate differences are below
    /// `tol`. `λ` is then read off as `η∞(G)`.
    pub fn power_iteration(&self, tol: f64, max_iters: usize) -> Result<Eigentriple> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be > 0")));
        }
        let d = self.dim();
        let mut h = vec![1.0; d];
        let mut eta = vec![1.0 / d as f64; d];
        let mut residual = f64::INFINITY;

        for iter in 1..=max_iters {
            let mut h_next = self.q_apply_unchecked(&h);
            let sup = h_next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(sup > 0.0) || !sup.is_finite() {
                return Err(Error::DegenerateMeasure(format!("‖Qh‖∞ = {sup}")));
            }
            h_next.iter_mut().for_each(|v| *v /= sup);

            let mut eta_next = self.left_q(&eta);
            let mass: f64 = eta_next.iter().sum();
            eta_next.iter_mut().for_each(|v| *v /= mass);

            let dh = h.iter().zip(&h_next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let deta: f64 = eta.iter().zip(&eta_next).map(|(a, b)| (a - b).abs()).sum();
            residual = dh.max(deta);
            h = h_next;
            eta = eta_next;

            if residual <= tol {
                let eta_inf = MeasureVector::new(eta)?.normalize()?;
                let lambda = eta_inf.integrate_unchecked(self.potential());
                let residual = self.eigen_residual(lambda, &h, &eta_inf);
                return Ok(Eigentriple {
                    lambda,
                    h,
                    eta_inf,
                    residual,
                    iterations: iter,
                });
            }
        }
        Err(Error::Convergence {
            iterations: max_iters,
            residual,
        })
    }

    pub fn dominant_eigentriple(&self) -> Result<Eigentriple> {
        self.power_iteration(DEFAULT_TOL, DEFAULT_MAX_ITERS)
    }

    fn eigen_residual(&self, lambda: f64, h: &[f64], eta: &MeasureVector) -> f64 {
        let qh = self.q_apply_unchecked(h);
        let right = qh.iter().zip(h).fold(0.0f64, |m, (q, v)| m.max((q - lambda * v).abs()));
        let left: f64 = self
            .left_q(eta.weights())
            .iter()
            .zip(eta.weights())
            .map(|(q, v)| (q - lambda * v).abs())
            .sum();
        right.max(left)
    }
}
