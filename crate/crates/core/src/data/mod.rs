//! Datasets and everything that manipulates them before a learner sees them:
//! label mutation, fold plans, ANOVA feature ranking, synthetic generators and
//! CSV ingestion.

mod csv;
mod features;
mod folds;
mod mutation;
mod synthetic;

pub use self::csv::{load_csv, LabelColumn};
pub use self::features::{anova_f_scores, select_k_best, FeatureScoreTable};
pub use self::folds::{make_fold_plan, FoldPlan};
pub use self::mutation::{mutate_labels, MutationPlan};
pub use self::synthetic::{make_synthetic, SyntheticSpec};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Binary classification data: a dense feature matrix plus {0,1} labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: DMatrix<f64>,
    labels: Vec<u8>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: DMatrix<f64>,
        labels: Vec<u8>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let name = name.into();
        if labels.len() != features.nrows() {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.nrows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidDataset(format!("label {bad} is not 0 or 1")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        if let Some(names) = &feature_names {
            if names.len() != features.ncols() {
                return Err(Error::InvalidDataset(format!(
                    "{} feature names for {} columns",
                    names.len(),
                    features.ncols()
                )));
            }
        }
        Ok(Self {
            name,
            features,
            labels,
            feature_names,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// Fails unless the dataset has at least two samples covering both classes.
    pub fn ensure_trainable(&self) -> Result<()> {
        let [zeros, ones] = self.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::SingleClass(self.name.clone()));
        }
        Ok(())
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Columns at `columns`, in that order.
    pub fn select_columns(&self, columns: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select_columns(columns),
            labels: self.labels.clone(),
            feature_names: self
                .feature_names
                .as_ref()
                .map(|names| columns.iter().map(|&c| names[c].clone()).collect()),
        }
    }

    /// Same features, replacement labels.
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Dataset> {
        Dataset::new(
            self.name.clone(),
            self.features.clone(),
            labels,
            self.feature_names.clone(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Dataset {
        self.name = name.into();
        self
    }
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[u8], truth: &[u8]) -> f64 {
    assert_eq!(predicted.len(), truth.len(), "accuracy on unequal lengths");
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}
