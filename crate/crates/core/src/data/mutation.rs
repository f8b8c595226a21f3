use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Which labels a mutation swapped. Applying the same plan twice restores
/// the original labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationPlan {
    pub eta: f64,
    pub seed: u64,
    pub flipped_indices: Vec<usize>,
}

impl MutationPlan {
    /// Draws `round(eta * n)` distinct indices uniformly at random.
    pub fn draw(n_samples: usize, eta: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::param("eta", format!("{eta} is outside [0, 1)")));
        }
        let count = (eta * n_samples as f64).round() as usize;
        let mut rng = rng_from_seed(seed);
        let mut flipped_indices = index::sample(&mut rng, n_samples, count).into_vec();
        flipped_indices.sort_unstable();
        Ok(Self {
            eta,
            seed,
            flipped_indices,
        })
    }

    /// Swaps 0 and 1 at every planned index.
    pub fn apply(&self, labels: &[u8]) -> Vec<u8> {
        let mut out = labels.to_vec();
        for &i in &self.flipped_indices {
            out[i] = 1 - out[i];
        }
        out
    }
}

/// Swaps the class of an `eta` proportion of labels chosen at random.
pub fn mutate_labels(dataset: &Dataset, eta: f64, seed: u64) -> Result<(Vec<u8>, MutationPlan)> {
    let plan = MutationPlan::draw(dataset.n_samples(), eta, seed)?;
    Ok((plan.apply(dataset.labels()), plan))
}
