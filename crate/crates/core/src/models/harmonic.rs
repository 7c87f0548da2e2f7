use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dmc::SimulatableFkModel;
use crate::error::{Error, Result};

pub const DEFAULT_TAU: f64 = 1.0 / 16.0;

/// Gaussian initial law `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianInit {
    #[serde(default)]
    pub mean: f64,
    #[serde(default = "one")]
    pub variance: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for GaussianInit {
    fn default() -> Self {
        Self {
            mean: 0.0,
            variance: 1.0,
        }
    }
}

impl GaussianInit {
    pub(crate) fn validate(&self, field: &str) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::validation(format!("{field}.mean"), "must be finite"));
        }
        if !(self.variance >= 0.0) || !self.variance.is_finite() {
            return Err(Error::validation(
                format!("{field}.variance"),
                format!("{} must be finite and >= 0", self.variance),
            ));
        }
        Ok(())
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.variance.sqrt() * z
    }
}

/// One-dimensional harmonic oscillator `H = −∇²/(2m) + mω²x²/2`, split
/// into a Brownian kernel over time `τ` and the potential `G(x) = e^{−τV(x)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHarmonic")]
pub struct HarmonicOscillator {
    tau: f64,
    omega: f64,
    mass: f64,
    init: GaussianInit,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHarmonic {
    #[serde(default = "default_tau")]
    tau: f64,
    #[serde(default = "one")]
    omega: f64,
    #[serde(default = "one")]
    mass: f64,
    #[serde(default)]
    init: GaussianInit,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

impl TryFrom<RawHarmonic> for HarmonicOscillator {
    type Error = Error;

    fn try_from(raw: RawHarmonic) -> Result<Self> {
        HarmonicOscillator::new(raw.tau, raw.omega, raw.mass, raw.init)
    }
}

impl Default for HarmonicOscillator {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            omega: 1.0,
            mass: 1.0,
            init: GaussianInit::default(),
        }
    }
}

pub(crate) fn check_positive(field: &str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::validation(field, format!("{value} must be finite and > 0")));
    }
    Ok(())
}

impl HarmonicOscillator {
    pub fn new(tau: f64, omega: f64, mass: f64, init: GaussianInit) -> Result<Self> {
        check_positive("tau", tau)?;
        check_positive("omega", omega)?;
        check_positive("mass", mass)?;
        init.validate("init")?;
        Ok(Self { tau, omega, mass, init })
    }

    pub fn with_tau(tau: f64) -> Result<Self> {
        Self::new(tau, 1.0, 1.0, GaussianInit::default())
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn init(&self) -> GaussianInit {
        self.init
    }

    /// Ground-state energy `ω/2`.
    pub fn ground_energy(&self) -> f64 {
        0.5 * self.omega
    }

    /// `V(x) = mω²x²/2`.
    pub fn potential_energy(&self, x: f64) -> f64 {
        0.5 * self.mass * self.omega * self.omega * x * x
    }

    /// `x + √(τ/m)·Z`.
    pub fn kernel_sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        x + (self.tau / self.mass).sqrt() * z
    }
}

impl SimulatableFkModel for HarmonicOscillator {
    type State = f64;

    fn name(&self) -> String {
        format!(
            "harmonic-oscillator(tau={}, omega={}, mass={})",
            self.tau, self.omega, self.mass
        )
    }

    fn draw_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.init.draw(rng))
    }

    fn kernel_draw<R: Rng + ?Sized>(&self, x: &f64, rng: &mut R) -> Result<f64> {
        Ok(self.kernel_sample(*x, rng))
    }

    #[inline]
    fn potential(&self, x: &f64) -> f64 {
        (-self.tau * self.potential_energy(*x)).exp()
    }
}
