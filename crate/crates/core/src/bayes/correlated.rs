use rand::Rng;
use rand_distr::{Distribution, StudentT};
use serde::{Deserialize, Serialize};

use super::student_t::student_t_cdf;
use super::{PosteriorTriple, RopeInterval};
use crate::error::{Error, Result};

/// Posterior of the mean difference under the correlated t-test: a
/// Student-t with `n - 1` degrees of freedom centred on the sample mean, whose
/// scale is inflated by the correlation `rho` between overlapping training
/// sets: `scale = sqrt(var * (1/n + rho / (1 - rho)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedTModel {
    pub n: usize,
    pub mean: f64,
    pub sample_variance: f64,
    pub rho: f64,
    pub dof: u32,
    pub scale: f64,
}

impl CorrelatedTModel {
    pub fn from_diffs(diff: &[f64], rho: f64) -> Result<Self> {
        let n = diff.len();
        if n < 2 {
            return Err(Error::param("diff", format!("{n} differences; need at least 2")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::param("rho", format!("{rho} is outside (0, 1)")));
        }
        if diff.iter().any(|d| !d.is_finite()) {
            return Err(Error::param("diff", "non-finite difference"));
        }
        let (mean, sample_variance) = if diff.iter().all(|&d| d == diff[0]) {
            (diff[0], 0.0)
        } else {
            let mean = diff.iter().sum::<f64>() / n as f64;
            let ss = diff.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>();
            (mean, ss / (n - 1) as f64)
        };
        let scale = (sample_variance * (1.0 / n as f64 + rho / (1.0 - rho))).sqrt();
        Ok(Self {
            n,
            mean,
            sample_variance,
            rho,
            dof: (n - 1) as u32,
            scale,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.scale == 0.0
    }

    /// Posterior probability of the three ROPE regions.
    pub fn triple(&self, rope: &RopeInterval) -> PosteriorTriple {
        if self.is_degenerate() {
            return PosteriorTriple::indicator(rope.region(self.mean));
        }
        let p_cv = student_t_cdf((rope.lo - self.mean) / self.scale, self.dof);
        let p_mv = student_t_cdf((self.mean - rope.hi) / self.scale, self.dof);
        PosteriorTriple {
            p_cv,
            p_pe: 1.0 - (p_cv + p_mv),
            p_mv,
        }
    }

    /// One draw of the mean difference from the posterior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.is_degenerate() {
            return self.mean;
        }
        let t: f64 = StudentT::new(self.dof as f64)
            .expect("dof >= 1")
            .sample(rng);
        self.mean + self.scale * t
    }
}

/// Bayesian correlated t-test on a difference vector (`MV - CV`).
pub fn correlated_ttest(diff: &[f64], rho: f64, rope: &RopeInterval) -> Result<PosteriorTriple> {
    Ok(CorrelatedTModel::from_diffs(diff, rho)?.triple(rope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_are_a_point_mass_in_the_rope() {
        let t = correlated_ttest(&[0.0; 100], 0.1, &RopeInterval::default()).unwrap();
        assert_eq!((t.p_cv, t.p_pe, t.p_mv), (0.0, 1.0, 0.0));
    }

    #[test]
    fn constant_outside_rope() {
        let t = correlated_ttest(&[0.1; 10], 0.1, &RopeInterval::default()).unwrap();
        assert_eq!((t.p_cv, t.p_pe, t.p_mv), (0.0, 0.0, 1.0));
        let t = correlated_ttest(&[-0.03; 10], 0.1, &RopeInterval::default()).unwrap();
        assert_eq!(t.p_cv, 1.0);
    }

    #[test]
    fn zero_mean_is_symmetric() {
        let diff = [0.05, -0.05, 0.02, -0.02, 0.0, 0.1, -0.1];
        let t = correlated_ttest(&diff, 0.1, &RopeInterval::default()).unwrap();
        assert_eq!(t.p_cv, t.p_mv);
        assert!(t.p_pe > 0.0);
    }

    #[test]
    fn scale_formula() {
        let diff = [0.0, 0.1, 0.2, 0.3];
        let m = CorrelatedTModel::from_diffs(&diff, 0.25).unwrap();
        let var = (0.15f64.powi(2) * 2.0 + 0.05f64.powi(2) * 2.0) / 3.0;
        assert!((m.sample_variance - var).abs() < 1e-15);
        assert!((m.scale - (var * (0.25 + 0.25 / 0.75)).sqrt()).abs() < 1e-15);
        assert_eq!(m.dof, 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let rope = RopeInterval::default();
        assert!(correlated_ttest(&[0.1], 0.1, &rope).is_err());
        assert!(correlated_ttest(&[0.1, 0.2], 0.0, &rope).is_err());
        assert!(correlated_ttest(&[0.1, 0.2], 1.0, &rope).is_err());
    }
}
