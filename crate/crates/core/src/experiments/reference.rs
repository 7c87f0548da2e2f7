use serde::{Deserialize, Serialize};

use super::config::ModelSpec;
use crate::error::Result;
use crate::format::serialize_sig17;

/// The target `λ` with a note on where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    #[serde(serialize_with = "serialize_sig17")]
    pub value: f64,
    pub provenance: String,
}

/// `λ` for the configured model.
///
/// Finite models use power iteration. The oscillator families use the
/// closed form `e^{−τE₀}` with `E₀ = ω/2`; the guided variant is a similarity
/// transform of the same operator, so it shares the value.
pub fn reference_value(model: &ModelSpec) -> Result<Reference> {
    Ok(match model {
        ModelSpec::Finite(m) => {
            let e = m.dominant_eigentriple()?;
            Reference {
                value: e.lambda,
                provenance: format!(
                    "power iteration (tol 1e-12, {} iterations, residual {:e})",
                    e.iterations, e.residual
                ),
            }
        }
        ModelSpec::HarmonicOscillator(m) => Reference {
            value: (-m.tau() * m.ground_energy()).exp(),
            provenance: "closed form exp(-tau*omega/2)".into(),
        },
        ModelSpec::GuidedHarmonicOscillator(m) => Reference {
            value: (-m.tau() * 0.5).exp(),
            provenance: "closed form exp(-tau/2) (guided transform shares the spectrum)".into(),
        },
    })
}
