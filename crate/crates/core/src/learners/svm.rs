//! Kernelized Pegasos.
//!
//! Each of the `T` steps draws one training index uniformly; when that sample
//! violates the margin under the current iterate (learning rate `1/(lambda t)`)
//! its dual count is incremented. The decision function is
//! `sum_j alpha_j y_j k(x_j, x) / (lambda T)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;

use super::kernel::{poly_gram, KernelExpansion, Standardizer};
use crate::seed::rng_from_seed;

/// Runs `steps` Pegasos iterations on a precomputed Gram matrix and returns
/// the dual violation counts.
pub fn train_pegasos(gram: &DMatrix<f64>, y: &[f64], lambda: f64, steps: usize, seed: u64) -> Vec<u32> {
    let n = y.len();
    let mut rng = rng_from_seed(seed);
    let mut alpha = vec![0u32; n];
    // running sum_j alpha_j y_j K(j, i) for every i
    let mut field = vec![0.0; n];
    for t in 1..=steps {
        let i = rng.random_range(0..n);
        let margin = y[i] * field[i] / (lambda * t as f64);
        if margin < 1.0 {
            alpha[i] += 1;
            let yi = y[i];
            for (f, k) in field.iter_mut().zip(gram.column(i).iter()) {
                *f += yi * k;
            }
        }
    }
    alpha
}

/// Regularized hinge objective `lambda/2 |w|^2 + mean(max(0, 1 - y f(x)))`
/// of the Pegasos iterate after `steps` steps.
pub fn pegasos_objective(gram: &DMatrix<f64>, y: &[f64], alpha: &[u32], lambda: f64, steps: usize) -> f64 {
    let scale = 1.0 / (lambda * steps as f64);
    let ay = DVector::from_iterator(y.len(), alpha.iter().zip(y).map(|(&a, &yi)| a as f64 * yi));
    let f = gram * &ay * scale;
    let norm_sq = ay.dot(&(gram * &ay)) * scale * scale;
    let hinge = f
        .iter()
        .zip(y)
        .map(|(fi, yi)| (1.0 - yi * fi).max(0.0))
        .sum::<f64>()
        / y.len() as f64;
    0.5 * lambda * norm_sq + hinge
}

pub(crate) fn signed(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

pub(crate) fn fit(x: &DMatrix<f64>, y: &[u8], degree: u32, lambda: f64, epochs: u32, seed: u64) -> KernelExpansion {
    let standardizer = Standardizer::fit(x);
    let rows = standardizer.transform(x);
    let gram = poly_gram(&rows, &rows, degree);
    let ys = signed(y);
    let steps = epochs as usize * y.len();
    let alpha = train_pegasos(&gram, &ys, lambda, steps, seed);

    let kept: Vec<usize> = (0..y.len()).filter(|&i| alpha[i] > 0).collect();
    let scale = 1.0 / (lambda * steps as f64);
    let coef = DVector::from_iterator(kept.len(), kept.iter().map(|&i| alpha[i] as f64 * ys[i] * scale));
    KernelExpansion {
        standardizer,
        support: rows.select_rows(&kept),
        coef,
        degree,
    }
}
