use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::KahanSum;

const STOCHASTIC_TOL: f64 = 1e-12;

/// A Feynman-Kac model on states `0..d`: row-stochastic kernel `M`,
/// strictly positive potential `G`, and initial law `eta0`.
///
/// Deserializes from `{"M": [[...]], "G": [...], "eta0": [...]}` and is
/// validated on construction, so every instance upholds its invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFiniteModel", into = "RawFiniteModel")]
pub struct FiniteFkModel {
    dim: usize,
    // Row-major d x d.
    transition: Vec<f64>,
    potential: Vec<f64>,
    initial: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiniteModel {
    #[serde(rename = "M")]
    transition: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    potential: Vec<f64>,
    eta0: Vec<f64>,
}

impl TryFrom<RawFiniteModel> for FiniteFkModel {
    type Error = Error;

    fn try_from(raw: RawFiniteModel) -> Result<Self> {
        FiniteFkModel::new(raw.transition, raw.potential, raw.eta0)
    }
}

impl From<FiniteFkModel> for RawFiniteModel {
    fn from(model: FiniteFkModel) -> Self {
        RawFiniteModel {
            transition: model.transition.chunks(model.dim).map(<[f64]>::to_vec).collect(),
            potential: model.potential,
            eta0: model.initial,
        }
    }
}

impl FiniteFkModel {
    pub fn new(transition: Vec<Vec<f64>>, potential: Vec<f64>, eta0: Vec<f64>) -> Result<Self> {
        let dim = potential.len();
        if dim == 0 {
            return Err(Error::validation("G", "state count must be positive"));
        }
        if transition.len() != dim {
            return Err(Error::validation(
                "M",
                format!("expected {dim} rows, found {}", transition.len()),
            ));
        }
        let mut flat = Vec::with_capacity(dim * dim);
        for (i, row) in transition.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::validation(
                    format!("M[{i}]"),
                    format!("expected {dim} entries, found {}", row.len()),
                ));
            }
            for (j, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::validation(
                        format!("M[{i}][{j}]"),
                        format!("transition probability {p} must be finite and >= 0"),
                    ));
                }
            }
            let total: f64 = row.iter().collect::<KahanSum>().value();
            if (total - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::validation(
                    format!("M[{i}]"),
                    format!("row sums to {total}, expected 1"),
                ));
            }
            flat.extend_from_slice(row);
        }
        for (i, &g) in potential.iter().enumerate() {
            if !g.is_finite() || g <= 0.0 {
                return Err(Error::validation(
                    format!("G[{i}]"),
                    format!("potential {g} must be finite and > 0"),
                ));
            }
        }
        if eta0.len() != dim {
            return Err(Error::validation(
                "eta0",
                format!("expected {dim} entries, found {}", eta0.len()),
            ));
        }
        for (i, &p) in eta0.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::validation(
                    format!("eta0[{i}]"),
                    format!("probability {p} must be finite and >= 0"),
                ));
            }
        }
        let mass = eta0.iter().collect::<KahanSum>().value();
        if (mass - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::validation("eta0", format!("sums to {mass}, expected 1")));
        }
        Ok(Self {
            dim,
            transition: flat,
            potential,
            initial: eta0,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            // serde wraps our validation message; surface it as a validation error
            Error::validation("model", e.to_string())
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn initial_measure(&self) -> MeasureVector {
        MeasureVector {
            weights: self.initial.clone(),
            normalized: true,
        }
    }

    /// Row `x` of the transition matrix.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.transition[x * self.dim..(x + 1) * self.dim]
    }

    fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::InvalidArgument(format!(
                "{what} has length {len}, model has {} states",
                self.dim
            )));
        }
        Ok(())
    }

    /// `Q(φ)(x) = G(x) Σ_y M(x, y) φ(y)`.
    pub fn q_apply(&self, phi: &[f64]) -> Result<Vec<f64>> {
        self.check_len("phi", phi.len())?;
        if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("phi[{i}] is not finite")));
        }
        Ok(self.q_apply_unchecked(phi))
    }

    pub(crate) fn q_apply_unchecked(&self, phi: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|x| {
                let m_phi: KahanSum = self.row(x).iter().zip(phi).map(|(m, p)| m * p).collect();
                self.potential[x] * m_phi.value()
            })
            .collect()
    }

    /// Left action `ηQ`, as a plain vector.
    pub(crate) fn left_q(&self, eta: &[f64]) -> Vec<f64> {
        let mut out = vec![KahanSum::new(); self.dim];
        for (x, &w) in eta.iter().enumerate() {
            let wx = w * self.potential[x];
            if wx == 0.0 {
                continue;
            }
            for (acc, m) in out.iter_mut().zip(self.row(x)) {
                acc.add(wx * m);
            }
        }
        out.into_iter().map(|k| k.value()).collect()
    }

    /// `η(G)`.
    pub fn measure_of_potential(&self, eta: &MeasureVector) -> Result<f64> {
        self.check_len("eta", eta.weights.len())?;
        Ok(eta.integrate_unchecked(&self.potential))
    }

    /// The nonlinear map `Φ(η)(y) = Σ_x η(x) G(x) M(x, y) / η(G)`.
    pub fn phi_map(&self, eta: &MeasureVector) -> Result<MeasureVector> {
        self.check_len("eta", eta.weights.len())?;
        let mass = eta.integrate_unchecked(&self.potential);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::DegenerateMeasure(format!("η(G) = {mass}")));
        }
        let weights = self.left_q(&eta.weights).into_iter().map(|w| w / mass).collect();
        Ok(MeasureVector {
            weights,
            normalized: true,
        })
    }

    /// `η_0, …, η_n` with each `η_k(G)`.
    ///
    /// `γ_n(1) = ∏_{p<n} η_p(G)` is available in log space through
    /// [`FiniteFkModel::log_gamma_mass`].
    pub fn exact_eta_sequence(&self, n: usize) -> Result<Vec<EtaStep>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut eta = self.initial_measure();
        let mut log_mass = KahanSum::new();
        for k in 0..=n {
            let eta_g = eta.integrate_unchecked(&self.potential);
            let next = if k < n { Some(self.phi_map(&eta)?) } else { None };
            out.push(EtaStep {
                eta,
                eta_of_g: eta_g,
                log_gamma_mass: log_mass.value(),
            });
            log_mass.add(eta_g.ln());
            match next {
                Some(m) => eta = m,
                None => break,
            }
        }
        Ok(out)
    }

    /// `log γ_n(1) = Σ_{p<n} log η_p(G)`.
    pub fn log_gamma_mass(&self, n: usize) -> Result<f64> {
        Ok(self
            .exact_eta_sequence(n)?
            .last()
            .map(|s| s.log_gamma_mass)
            .unwrap_or(0.0))
    }

    /// `Φ^l(μ)(φ) = μQ^l(φ) / μQ^l(1)`.
    ///
    /// Both iterates are rescaled by the same factor each step so long lags
    /// neither underflow nor overflow.
    pub fn lag_limit(&self, mu: &MeasureVector, lag: usize, phi: &[f64]) -> Result<f64> {
        self.check_len("mu", mu.weights.len())?;
        self.check_len("phi", phi.len())?;
        let mut q_phi = phi.to_vec();
        let mut q_one = vec![1.0; self.dim];
        for _ in 0..lag {
            q_phi = self.q_apply_unchecked(&q_phi);
            q_one = self.q_apply_unchecked(&q_one);
            let scale = q_one.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 {
                q_phi.iter_mut().for_each(|v| *v /= scale);
                q_one.iter_mut().for_each(|v| *v /= scale);
            }
        }
        let num = mu.integrate_unchecked(&q_phi);
        let den = mu.integrate_unchecked(&q_one);
        if !(den > 0.0) {
            return Err(Error::DegenerateMeasure(format!("μQ^{lag}(1) = {den}")));
        }
        Ok(num / den)
    }
}

/// One entry of [`FiniteFkModel::exact_eta_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct EtaStep {
    pub eta: MeasureVector,
    pub eta_of_g: f64,
    /// `log γ_k(1)`; the unnormalized measure is `γ_k = exp(log_gamma_mass) η_k`.
    pub log_gamma_mass: f64,
}

/// A non-negative measure on a finite state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureVector {
    weights: Vec<f64>,
    normalized: bool,
}

impl MeasureVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "measure weight {} at index {i} must be finite and >= 0",
                weights[i]
            )));
        }
        Ok(Self {
            weights,
            normalized: false,
        })
    }

    /// Builds a probability vector; fails unless the weights sum to 1 within 1e-12.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        let mut m = Self::new(weights)?;
        let total = m.total_mass();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidArgument(format!("probability vector sums to {total}")));
        }
        m.normalized = true;
        Ok(m)
    }

    pub fn normalize(mut self) -> Result<Self> {
        let total = self.total_mass();
        if !(total > 0.0) {
            return Err(Error::DegenerateMeasure("zero total mass".into()));
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        self.normalized = true;
        Ok(self)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().collect::<KahanSum>().value()
    }

    /// `μ(φ)`.
    pub fn integrate(&self, phi: &[f64]) -> Result<f64> {
        if phi.len() != self.weights.len() {
            return Err(Error::InvalidArgument(format!(
                "phi has length {}, measure has {}",
                phi.len(),
                self.weights.len()
            )));
        }
        Ok(self.integrate_unchecked(phi))
    }

    pub(crate) fn integrate_unchecked(&self, phi: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(phi)
            .map(|(w, p)| w * p)
            .collect::<KahanSum>()
            .value()
    }

    pub fn l1_distance(&self, other: &MeasureVector) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}
