use nalgebra::DMatrix;
use rand::seq::{index, SliceRandom};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

/// Two spherical unit-variance Gaussian clusters, centred at
/// `-class_separation / 2` (class 0) and `+class_separation / 2` (class 1)
/// along each informative axis. Remaining axes are pure N(0, 1) noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    /// Number of leading informative columns; all columns when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_informative: Option<usize>,
    pub class_separation: f64,
    pub label_noise_rate: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<usize> {
        if self.n_samples < 4 {
            return Err(Error::param("n_samples", format!("{} < 4", self.n_samples)));
        }
        if self.n_features == 0 {
            return Err(Error::param("n_features", "must be positive"));
        }
        let informative = self.n_informative.unwrap_or(self.n_features);
        if informative == 0 || informative > self.n_features {
            return Err(Error::param(
                "n_informative",
                format!("{informative} is outside [1, {}]", self.n_features),
            ));
        }
        if !self.class_separation.is_finite() || self.class_separation < 0.0 {
            return Err(Error::param("class_separation", format!("{}", self.class_separation)));
        }
        if !(0.0..0.5).contains(&self.label_noise_rate) {
            return Err(Error::param(
                "label_noise_rate",
                format!("{} is outside [0, 0.5)", self.label_noise_rate),
            ));
        }
        Ok(informative)
    }

    pub fn default_name(&self) -> String {
        format!(
            "synthetic-n{}-p{}-sep{}-noise{}-s{}",
            self.n_samples, self.n_features, self.class_separation, self.label_noise_rate, self.seed
        )
    }
}

/// Draws a balanced two-cluster dataset, then flips exactly
/// `round(label_noise_rate * n)` labels.
pub fn make_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    let informative = spec.validate()?;
    let n = spec.n_samples;
    let mut rng = rng_from_seed(derive_seed(spec.seed, &[0]));

    let mut clean: Vec<u8> = (0..n).map(|i| u8::from(i >= n / 2)).collect();
    clean.shuffle(&mut rng);

    let half = spec.class_separation / 2.0;
    let mut x = DMatrix::zeros(n, spec.n_features);
    for i in 0..n {
        let centre = if clean[i] == 1 { half } else { -half };
        for j in 0..spec.n_features {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[(i, j)] = if j < informative { centre + z } else { z };
        }
    }

    let mut noise_rng = rng_from_seed(derive_seed(spec.seed, &[1]));
    let flips = (spec.label_noise_rate * n as f64).round() as usize;
    let mut labels = clean;
    for i in index::sample(&mut noise_rng, n, flips) {
        labels[i] = 1 - labels[i];
    }
    Dataset::new(spec.default_name(), x, labels, None)
}
