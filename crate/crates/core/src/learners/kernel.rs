use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial kernel `(x . z + 1)^degree`.
pub fn poly_kernel(x: &[f64], z: &[f64], degree: u32) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: z.len(),
        });
    }
    if degree == 0 {
        return Err(Error::param("degree", "must be at least 1"));
    }
    let dot: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
    Ok((dot + 1.0).powi(degree as i32))
}

/// Per-column z-score fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(m);
            // constant columns map to zero
            scale.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Self { mean, scale }
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.mean[j], self.scale[j]);
            col.apply(|v| *v = (*v - m) / s);
        }
        out
    }
}

/// Polynomial kernel matrix between the rows of `a` and the rows of `b`.
pub fn poly_gram(a: &DMatrix<f64>, b: &DMatrix<f64>, degree: u32) -> DMatrix<f64> {
    let mut g = a * b.transpose();
    let d = degree as i32;
    g.apply(|v| *v = (*v + 1.0).powi(d));
    g
}

/// Learned kernel expansion `f(x) = sum_j coef_j k(s_j, x)` over retained
/// (standardized) training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelExpansion {
    pub(crate) standardizer: Standardizer,
    pub(crate) support: DMatrix<f64>,
    pub(crate) coef: DVector<f64>,
    pub(crate) degree: u32,
}

impl KernelExpansion {
    pub fn decision_values(&self, x: &DMatrix<f64>) -> DVector<f64> {
        if self.support.nrows() == 0 {
            return DVector::zeros(x.nrows());
        }
        let z = self.standardizer.transform(x);
        poly_gram(&z, &self.support, self.degree) * &self.coef
    }

    pub fn coefficients(&self) -> &[f64] {
        self.coef.as_slice()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(poly_kernel(&[0.0, 0.0], &[0.0, 0.0], 7).unwrap(), 1.0);
        assert_eq!(poly_kernel(&[1.0, 1.0], &[1.0, 1.0], 2).unwrap(), 9.0);
        assert!(poly_kernel(&[1.0], &[1.0, 2.0], 2).is_err());
        assert!(poly_kernel(&[1.0], &[1.0], 0).is_err());
    }

    #[test]
    fn gram_matches_pointwise_kernel() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.25, 2.0]);
        let b = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 3.0, 1.0, -1.0, -1.0]);
        let g = poly_gram(&a, &b, 3);
        for i in 0..2 {
            for j in 0..3 {
                let ra: Vec<f64> = a.row(i).iter().copied().collect();
                let rb: Vec<f64> = b.row(j).iter().copied().collect();
                assert!((g[(i, j)] - poly_kernel(&ra, &rb, 3).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn standardizer_zero_mean_unit_scale() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0]);
        let s = Standardizer::fit(&x);
        let z = s.transform(&x);
        assert!(z.column(0).sum().abs() < 1e-12);
        assert!((z.column(0).norm_squared() / 4.0 - 1.0).abs() < 1e-12);
        assert!(z.column(1).iter().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn symmetric(x in proptest::collection::vec(-3.0f64..3.0, 4), z in proptest::collection::vec(-3.0f64..3.0, 4), d in 1u32..16) {
            prop_assert_eq!(poly_kernel(&x, &z, d).unwrap(), poly_kernel(&z, &x, d).unwrap());
        }
    }
}
