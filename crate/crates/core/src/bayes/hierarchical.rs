//! Pooled comparison over several datasets.
//!
//! [`TwoLevelMonteCarlo`] is a lightweight surrogate for a full hierarchical
//! Student-t model. Each round draws one mean difference from every dataset's
//! correlated-t posterior, summarises those draws by their mean `m` and
//! standard deviation `s`, and draws a population-level mean from a
//! Student-t with `D - 1` degrees of freedom located at `m` with scale
//! `s / sqrt(D)` (`D` = number of datasets). Region frequencies of the
//! population draws form the posterior triple.

use rand_distr::{Distribution, StudentT};
use serde::{Deserialize, Serialize};

use super::correlated::CorrelatedTModel;
use super::{PosteriorTriple, Region, RopeInterval};
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

pub const DEFAULT_POSTERIOR_SAMPLES: usize = 4000;
const MIN_POSTERIOR_SAMPLES: usize = 1000;

/// Produces population-level posterior draws of the mean difference.
pub trait PopulationSampler {
    fn draw(&self, models: &[CorrelatedTModel], n_samples: usize, seed: u64) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TwoLevelMonteCarlo;

impl PopulationSampler for TwoLevelMonteCarlo {
    fn draw(&self, models: &[CorrelatedTModel], n_samples: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        let d = models.len();
        let population = StudentT::new((d - 1) as f64).expect("at least two datasets");
        let mut means = vec![0.0; d];
        (0..n_samples)
            .map(|_| {
                for (slot, model) in means.iter_mut().zip(models) {
                    *slot = model.sample(&mut rng);
                }
                let loc = means.iter().sum::<f64>() / d as f64;
                let var = means.iter().map(|m| (m - loc) * (m - loc)).sum::<f64>() / (d - 1) as f64;
                let scale = (var / d as f64).sqrt();
                let t: f64 = population.sample(&mut rng);
                if scale > 0.0 {
                    loc + scale * t
                } else {
                    loc
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSample {
    pub value: f64,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalResult {
    pub triple: PosteriorTriple,
    /// Draws falling below, inside and above the ROPE.
    pub counts: [usize; 3],
    pub samples: Vec<PosteriorSample>,
}

/// Classifies population draws from `sampler` against the ROPE.
pub fn hierarchical_test_models(
    models: &[CorrelatedTModel],
    rope: &RopeInterval,
    n_samples: usize,
    seed: u64,
    sampler: &dyn PopulationSampler,
) -> Result<HierarchicalResult> {
    if models.len() < 2 {
        return Err(Error::param(
            "datasets",
            format!("{} datasets; need at least 2", models.len()),
        ));
    }
    if n_samples < MIN_POSTERIOR_SAMPLES {
        return Err(Error::param(
            "n_samples",
            format!("{n_samples} < {MIN_POSTERIOR_SAMPLES}"),
        ));
    }
    let samples: Vec<PosteriorSample> = sampler
        .draw(models, n_samples, seed)
        .into_iter()
        .map(|value| PosteriorSample {
            value,
            region: rope.region(value),
        })
        .collect();
    let mut counts = [0usize; 3];
    for s in &samples {
        counts[match s.region {
            Region::Cv => 0,
            Region::Pe => 1,
            Region::Mv => 2,
        }] += 1;
    }
    let total = samples.len() as f64;
    Ok(HierarchicalResult {
        triple: PosteriorTriple {
            p_cv: counts[0] as f64 / total,
            p_pe: counts[1] as f64 / total,
            p_mv: counts[2] as f64 / total,
        },
        counts,
        samples,
    })
}

/// Hierarchical test over per-dataset difference vectors sharing one `rho`.
pub fn hierarchical_test(
    per_dataset_diffs: &[Vec<f64>],
    rho: f64,
    rope: &RopeInterval,
    n_samples: usize,
    seed: u64,
) -> Result<HierarchicalResult> {
    let models = per_dataset_diffs
        .iter()
        .map(|d| CorrelatedTModel::from_diffs(d, rho))
        .collect::<Result<Vec<_>>>()?;
    hierarchical_test_models(&models, rope, n_samples, seed, &TwoLevelMonteCarlo)
}
