use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::harmonic::{check_positive, GaussianInit, DEFAULT_TAU};
use crate::dmc::SimulatableFkModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    /// Exact transition of `dX = −αX dt + dW` over time `τ`.
    #[default]
    ExactOu,
    /// One Euler–Maruyama step of the same diffusion.
    Euler,
}

/// Importance-sampled harmonic oscillator (`m = ω = 1`) with Gaussian
/// guiding function `ψ_G(x) = e^{−αx²/2}`.
///
/// Walkers follow the drift `∇ψ_G/ψ_G = −αx` and are weighted by
/// `G = e^{−τE_L}` with local energy `E_L = Hψ_G/ψ_G`. At `α = 1` the guide
/// is the exact ground state and the weight is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGuided")]
pub struct GuidedHarmonicOscillator {
    tau: f64,
    alpha: f64,
    kernel: KernelMode,
    init: GaussianInit,
    // cached kernel coefficients: x' = decay·x + spread·Z
    #[serde(skip)]
    decay: f64,
    #[serde(skip)]
    spread: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGuided {
    #[serde(default = "default_tau")]
    tau: f64,
    alpha: f64,
    #[serde(default)]
    kernel: KernelMode,
    #[serde(default)]
    init: GaussianInit,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

impl TryFrom<RawGuided> for GuidedHarmonicOscillator {
    type Error = Error;

    fn try_from(raw: RawGuided) -> Result<Self> {
        GuidedHarmonicOscillator::new(raw.tau, raw.alpha, raw.kernel, raw.init)
    }
}

impl GuidedHarmonicOscillator {
    pub fn new(tau: f64, alpha: f64, kernel: KernelMode, init: GaussianInit) -> Result<Self> {
        check_positive("tau", tau)?;
        check_positive("alpha", alpha)?;
        init.validate("init")?;
        let (decay, spread) = match kernel {
            KernelMode::ExactOu => (
                (-alpha * tau).exp(),
                (-(-2.0 * alpha * tau).exp_m1() / (2.0 * alpha)).sqrt(),
            ),
            KernelMode::Euler => (1.0 - alpha * tau, tau.sqrt()),
        };
        Ok(Self {
            tau,
            alpha,
            kernel,
            init,
            decay,
            spread,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kernel(&self) -> KernelMode {
        self.kernel
    }

    pub fn init(&self) -> GaussianInit {
        self.init
    }

    /// Conditional mean factor of the kernel: `E[x' | x] = factor · x`.
    pub fn mean_factor(&self) -> f64 {
        self.decay
    }

    /// Conditional variance of the kernel.
    pub fn step_variance(&self) -> f64 {
        self.spread * self.spread
    }

    /// `E_L(x) = α/2 + (1 − α²)x²/2`.
    pub fn local_energy(&self, x: f64) -> f64 {
        0.5 * self.alpha + 0.5 * (1.0 - self.alpha * self.alpha) * x * x
    }

    pub fn kernel_sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.decay * x + self.spread * z
    }
}

impl SimulatableFkModel for GuidedHarmonicOscillator {
    type State = f64;

    fn name(&self) -> String {
        format!(
            "guided-harmonic-oscillator(tau={}, alpha={}, kernel={:?})",
            self.tau, self.alpha, self.kernel
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
        (-self.tau * self.local_energy(*x)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn exact(alpha: f64, tau: f64) -> GuidedHarmonicOscillator {
        GuidedHarmonicOscillator::new(tau, alpha, KernelMode::ExactOu, GaussianInit::default()).unwrap()
    }

    fn euler(alpha: f64, tau: f64) -> GuidedHarmonicOscillator {
        GuidedHarmonicOscillator::new(tau, alpha, KernelMode::Euler, GaussianInit::default()).unwrap()
    }

    /// `Hψ/ψ` by central finite differences for `H = −½∂² + ½x²`.
    fn local_energy_fd(alpha: f64, x: f64) -> f64 {
        let psi = |y: f64| (-0.5 * alpha * y * y).exp();
        let h = 1e-4;
        let d2 = (psi(x + h) - 2.0 * psi(x) + psi(x - h)) / (h * h);
        (-0.5 * d2 + 0.5 * x * x * psi(x)) / psi(x)
    }

    #[test]
    fn local_energy_matches_finite_differences() {
        for alpha in [0.3, 1.0, 1.7] {
            let m = exact(alpha, DEFAULT_TAU);
            for x in [-2.0, -0.5, 0.0, 0.8, 3.0] {
                assert!((m.local_energy(x) - local_energy_fd(alpha, x)).abs() < 1e-5);
            }
            assert_eq!(m.local_energy(0.0), alpha / 2.0);
        }
    }

    #[test]
    fn exact_guide_has_constant_weight() {
        let m = exact(1.0, DEFAULT_TAU);
        for x in [-10.0, -1.0, 0.0, 0.3, 25.0] {
            assert_eq!(m.local_energy(x), 0.5);
            assert_eq!(m.potential(&x), (-1.0f64 / 32.0).exp());
        }
        assert!(((-1.0f64 / 32.0).exp() - 0.9692332).abs() < 1e-7);
    }

    #[test]
    fn weights_positive_for_alpha_up_to_two() {
        for alpha in [0.1, 0.5, 1.0, 1.5, 2.0] {
            let m = exact(alpha, DEFAULT_TAU);
            for x in [-30.0, -3.0, 0.0, 2.0, 30.0] {
                let g = m.potential(&x);
                assert!(g > 0.0 && g.is_finite(), "alpha {alpha} x {x}: {g}");
            }
        }
    }

    #[test]
    fn exact_ou_coefficients() {
        let m = exact(1.0, 1.0 / 16.0);
        assert!((m.mean_factor() - (-1.0f64 / 16.0).exp()).abs() < 1e-15);
        assert!((m.mean_factor() - 0.9394131).abs() < 1e-7);
        let var = (1.0 - (-0.125f64).exp()) / 2.0;
        assert!((m.step_variance() - var).abs() < 1e-15);
        assert!((m.step_variance() - 0.0587515).abs() < 1e-7);
    }

    #[test]
    fn exact_ou_empirical_moments() {
        let m = exact(1.0, 1.0 / 16.0);
        let mut rng = RngStream::trajectory(21, 0).rng();
        let n = 1_000_000;
        let x0 = 1.5;
        let (mut s, mut ss) = (0.0, 0.0);
        for _ in 0..n {
            let y = m.kernel_sample(x0, &mut rng);
            s += y;
            ss += y * y;
        }
        let nf = n as f64;
        let mean = s / nf;
        let var = ss / nf - mean * mean;
        let v = m.step_variance();
        assert!((mean - m.mean_factor() * x0).abs() < 4.0 * (v / nf).sqrt());
        assert!((var - v).abs() < 4.0 * (2.0 * v * v / nf).sqrt());
    }

    #[test]
    fn euler_agrees_with_exact_for_small_tau() {
        let tau = 1e-4;
        let (a, b) = (exact(1.3, tau), euler(1.3, tau));
        assert!((a.mean_factor() - b.mean_factor()).abs() < 1e-6);
        assert!((a.step_variance() - b.step_variance()).abs() < 1e-6);
    }

    #[test]
    fn vanishing_drift_recovers_brownian_variance() {
        let m = exact(1e-9, 0.25);
        assert!((m.step_variance() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn exact_ou_preserves_stationary_law() {
        let alpha = 0.8;
        let m = GuidedHarmonicOscillator::new(
            DEFAULT_TAU,
            alpha,
            KernelMode::ExactOu,
            GaussianInit {
                mean: 0.0,
                variance: 1.0 / (2.0 * alpha),
            },
        )
        .unwrap();
        let mut rng = RngStream::trajectory(22, 0).rng();
        let n = 20_000;
        let mut ss = 0.0;
        for _ in 0..n {
            let mut x = m.draw_initial(&mut rng).unwrap();
            for _ in 0..100 {
                x = m.kernel_sample(x, &mut rng);
            }
            ss += x * x;
        }
        let target = 1.0 / (2.0 * alpha);
        let var = ss / n as f64;
        assert!(
            (var - target).abs() < 4.0 * (2.0 * target * target / n as f64).sqrt(),
            "{var}"
        );
    }

    #[test]
    fn requires_alpha() {
        assert!(serde_json::from_str::<GuidedHarmonicOscillator>("{}").is_err());
        let m: GuidedHarmonicOscillator = serde_json::from_str(r#"{"alpha": 1.0, "kernel": "euler"}"#).unwrap();
        assert_eq!(m.kernel(), KernelMode::Euler);
        assert!(GuidedHarmonicOscillator::new(0.1, 0.0, KernelMode::ExactOu, GaussianInit::default()).is_err());
    }
}
