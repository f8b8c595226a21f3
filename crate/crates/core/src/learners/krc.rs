//! Kernel ridge classifier: ridge regression on ±1 targets in the dual.

use nalgebra::{DMatrix, DVector};

use super::kernel::{poly_gram, KernelExpansion, Standardizer};
use crate::error::{Error, Result};

const JITTER_ATTEMPTS: usize = 4;

/// Solves `(gram + lambda I) a = y` by Cholesky factorization.
///
/// The system is symmetrically rescaled by the inverse square root of its
/// diagonal before factorizing, which leaves the solution unchanged but keeps
/// high-degree Gram matrices (entries spanning many orders of magnitude)
/// factorizable. If factorization still fails, increasing diagonal jitter is
/// added before giving up.
pub fn solve_ridge_dual(gram: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let n = gram.nrows();
    let mut system = gram.clone();
    for i in 0..n {
        system[(i, i)] += lambda;
    }
    let d: Vec<f64> = (0..n).map(|i| 1.0 / system[(i, i)].sqrt()).collect();
    for j in 0..n {
        for i in 0..n {
            system[(i, j)] *= d[i] * d[j];
        }
    }
    let rhs = DVector::from_fn(n, |i, _| y[i] * d[i]);
    for attempt in 0..=JITTER_ATTEMPTS {
        let mut candidate = system.clone();
        if attempt > 0 {
            let jitter = 1e-12 * 100f64.powi(attempt as i32 - 1);
            for i in 0..n {
                candidate[(i, i)] += jitter;
            }
        }
        if let Some(chol) = candidate.cholesky() {
            let b = chol.solve(&rhs);
            return Ok(DVector::from_fn(n, |i, _| b[i] * d[i]));
        }
    }
    Err(Error::Factorization {
        attempts: JITTER_ATTEMPTS + 1,
    })
}

pub(crate) fn fit(x: &DMatrix<f64>, y: &[u8], degree: u32, lambda: f64) -> Result<KernelExpansion> {
    let standardizer = Standardizer::fit(x);
    let support = standardizer.transform(x);
    let gram = poly_gram(&support, &support, degree);
    let targets = DVector::from_iterator(y.len(), y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }));
    let coef = solve_ridge_dual(&gram, &targets, lambda)?;
    Ok(KernelExpansion {
        standardizer,
        support,
        coef,
        degree,
    })
}
