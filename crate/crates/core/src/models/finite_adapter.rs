use rand::Rng;

use crate::dmc::SimulatableFkModel;
use crate::error::Result;
use crate::finite::FiniteFkModel;

/// Exposes a [`FiniteFkModel`] to the particle engine; states are indices.
#[derive(Debug, Clone)]
pub struct FiniteAdapter {
    model: FiniteFkModel,
    initial_cdf: Vec<f64>,
    row_cdfs: Vec<Vec<f64>>,
}

fn cdf(probabilities: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probabilities
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Categorical draw that never lands on a zero-probability entry.
fn draw_index<R: Rng + ?Sized>(probabilities: &[f64], cdf: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    let i = cdf.partition_point(|&c| c <= u);
    if i < probabilities.len() && probabilities[i] > 0.0 {
        i
    } else {
        probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

impl FiniteAdapter {
    pub fn new(model: FiniteFkModel) -> Self {
        let initial_cdf = cdf(model.initial());
        let row_cdfs = (0..model.dim()).map(|x| cdf(model.row(x))).collect();
        Self {
            model,
            initial_cdf,
            row_cdfs,
        }
    }

    pub fn model(&self) -> &FiniteFkModel {
        &self.model
    }
}

impl From<FiniteFkModel> for FiniteAdapter {
    fn from(model: FiniteFkModel) -> Self {
        Self::new(model)
    }
}

impl SimulatableFkModel for FiniteAdapter {
    type State = usize;

    fn name(&self) -> String {
        format!("finite({} states)", self.model.dim())
    }

    fn draw_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        Ok(draw_index(self.model.initial(), &self.initial_cdf, rng))
    }

    fn kernel_draw<R: Rng + ?Sized>(&self, x: &usize, rng: &mut R) -> Result<usize> {
        Ok(draw_index(self.model.row(*x), &self.row_cdfs[*x], rng))
    }

    #[inline]
    fn potential(&self, x: &usize) -> f64 {
        self.model.potential()[*x]
    }
}
