//! Bayesian comparison of paired score differences.
//!
//! Differences are always `MV score - CV score` ([`DIFF_CONVENTION`]), so
//! `p_mv` is the posterior mass above the ROPE and `p_cv` the mass below it.

mod correlated;
mod hierarchical;
mod student_t;

pub use self::correlated::{correlated_ttest, CorrelatedTModel};
pub use self::hierarchical::{
    hierarchical_test, hierarchical_test_models, HierarchicalResult, PopulationSampler, PosteriorSample,
    TwoLevelMonteCarlo, DEFAULT_POSTERIOR_SAMPLES,
};
pub use self::student_t::{ln_gamma, regularized_incomplete_beta, student_t_cdf, student_t_sf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign convention stamped into every artifact carrying differences.
pub const DIFF_CONVENTION: &str = "mv_minus_cv";

/// Region of practical equivalence for the mean difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RopeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl Default for RopeInterval {
    fn default() -> Self {
        Self {
            lo: -0.025,
            hi: 0.025,
        }
    }
}

impl RopeInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param("rope", format!("[{lo}, {hi}] is not a proper interval")));
        }
        Ok(Self { lo, hi })
    }

    pub fn region(&self, value: f64) -> Region {
        if value < self.lo {
            Region::Cv
        } else if value > self.hi {
            Region::Mv
        } else {
            Region::Pe
        }
    }
}

/// Which side of the ROPE a value falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Cv,
    Pe,
    Mv,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Cv => "cv",
            Region::Pe => "pe",
            Region::Mv => "mv",
        }
    }
}

/// Posterior probabilities that CV is better, that the two are practically
/// equivalent, and that MV is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTriple {
    pub p_cv: f64,
    pub p_pe: f64,
    pub p_mv: f64,
}

impl PosteriorTriple {
    pub fn indicator(region: Region) -> Self {
        let mut t = PosteriorTriple {
            p_cv: 0.0,
            p_pe: 0.0,
            p_mv: 0.0,
        };
        match region {
            Region::Cv => t.p_cv = 1.0,
            Region::Pe => t.p_pe = 1.0,
            Region::Mv => t.p_mv = 1.0,
        }
        t
    }

    pub fn sum(&self) -> f64 {
        self.p_cv + self.p_pe + self.p_mv
    }
}
