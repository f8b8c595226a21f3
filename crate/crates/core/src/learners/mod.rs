//! Binary classifiers with one explicit capacity knob each, behind a uniform
//! fit / predict contract.
//!
//! | algorithm       | capacity            | range   |
//! |-----------------|---------------------|---------|
//! | `decision_tree` | maximum depth       | 1..=30  |
//! | `poly_krc`      | polynomial degree   | 1..=15  |
//! | `poly_svm`      | polynomial degree   | 1..=15  |
//!
//! Kernel methods standardize features using statistics of the training rows
//! and use the kernel `(x . z + 1)^degree`. A zero decision value predicts
//! class 0.

mod kernel;
mod krc;
mod svm;
mod tree;

pub use self::kernel::{poly_gram, poly_kernel, KernelExpansion, Standardizer};
pub use self::krc::solve_ridge_dual;
pub use self::svm::{pegasos_objective, train_pegasos};
pub use self::tree::DecisionTree;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const MAX_TREE_DEPTH: u32 = 30;
pub const MAX_POLY_DEGREE: u32 = 15;
pub const DEFAULT_KRC_LAMBDA: f64 = 1.0;
pub const DEFAULT_SVM_LAMBDA: f64 = 0.01;
pub const DEFAULT_SVM_EPOCHS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    DecisionTree,
    PolyKrc,
    PolySvm,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::PolyKrc => "poly_krc",
            Algorithm::PolySvm => "poly_svm",
        }
    }

    pub fn max_capacity(self) -> u32 {
        match self {
            Algorithm::DecisionTree => MAX_TREE_DEPTH,
            Algorithm::PolyKrc | Algorithm::PolySvm => MAX_POLY_DEGREE,
        }
    }

    pub fn default_regularization(self) -> f64 {
        match self {
            Algorithm::DecisionTree => 0.0,
            Algorithm::PolyKrc => DEFAULT_KRC_LAMBDA,
            Algorithm::PolySvm => DEFAULT_SVM_LAMBDA,
        }
    }

    /// Tag mixed into child seeds.
    pub(crate) fn tag(self) -> u64 {
        match self {
            Algorithm::DecisionTree => 1,
            Algorithm::PolyKrc => 2,
            Algorithm::PolySvm => 3,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One point of a capacity grid: the unit of selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateModel {
    pub algorithm: Algorithm,
    pub capacity: u32,
    /// Ridge lambda for KRC, Pegasos lambda for the SVM; unused by trees.
    #[serde(default)]
    pub regularization: f64,
    /// Pegasos passes over the data; unused by other algorithms.
    #[serde(default = "default_epochs")]
    pub epochs: u32,
}

fn default_epochs() -> u32 {
    DEFAULT_SVM_EPOCHS
}

impl CandidateModel {
    pub fn decision_tree(max_depth: u32) -> Self {
        Self {
            algorithm: Algorithm::DecisionTree,
            capacity: max_depth,
            regularization: 0.0,
            epochs: DEFAULT_SVM_EPOCHS,
        }
    }

    pub fn poly_krc(degree: u32, lambda: f64) -> Self {
        Self {
            algorithm: Algorithm::PolyKrc,
            capacity: degree,
            regularization: lambda,
            epochs: DEFAULT_SVM_EPOCHS,
        }
    }

    pub fn poly_svm(degree: u32, lambda: f64, epochs: u32) -> Self {
        Self {
            algorithm: Algorithm::PolySvm,
            capacity: degree,
            regularization: lambda,
            epochs,
        }
    }

    /// Grid over capacities `lo..=hi` sharing the other settings.
    pub fn grid(template: CandidateModel, lo: u32, hi: u32) -> Vec<CandidateModel> {
        (lo..=hi)
            .map(|capacity| CandidateModel { capacity, ..template })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let max = self.algorithm.max_capacity();
        if self.capacity == 0 || self.capacity > max {
            return Err(Error::param(
                "capacity",
                format!("{} for {} is outside [1, {max}]", self.capacity, self.algorithm),
            ));
        }
        if self.algorithm != Algorithm::DecisionTree {
            if !(self.regularization > 0.0 && self.regularization.is_finite()) {
                return Err(Error::param(
                    "regularization",
                    format!("{} must be positive", self.regularization),
                ));
            }
            if self.algorithm == Algorithm::PolySvm && self.epochs == 0 {
                return Err(Error::param("epochs", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Stable key used for seed derivation and tie-breaking.
    pub(crate) fn seed_key(&self) -> u64 {
        (self.algorithm.tag() << 32) | self.capacity as u64
    }
}

impl std::fmt::Display for CandidateModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({})", self.algorithm, self.capacity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum Params {
    Tree(DecisionTree),
    Kernel(KernelExpansion),
}

/// A trained classifier. Immutable; prediction is a pure function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub candidate: CandidateModel,
    pub seed: u64,
    pub n_features: usize,
    pub(crate) params: Params,
}

impl FittedModel {
    pub fn tree(&self) -> Option<&DecisionTree> {
        match &self.params {
            Params::Tree(t) => Some(t),
            Params::Kernel(_) => None,
        }
    }

    pub fn kernel_expansion(&self) -> Option<&KernelExpansion> {
        match &self.params {
            Params::Kernel(k) => Some(k),
            Params::Tree(_) => None,
        }
    }

    pub fn predict(&self, features: &DMatrix<f64>) -> Result<Vec<u8>> {
        predict(self, features)
    }

    pub fn accuracy(&self, dataset: &Dataset) -> Result<f64> {
        let predicted = self.predict(dataset.features())?;
        Ok(crate::data::accuracy(&predicted, dataset.labels()))
    }
}

fn ensure_nonempty(dataset: &Dataset) -> Result<()> {
    if dataset.n_samples() == 0 {
        return Err(Error::InvalidDataset("cannot fit on an empty dataset".into()));
    }
    Ok(())
}

pub fn fit_decision_tree(dataset: &Dataset, max_depth: u32, seed: u64) -> Result<FittedModel> {
    ensure_nonempty(dataset)?;
    if max_depth == 0 {
        return Err(Error::param("max_depth", "must be at least 1"));
    }
    let tree = DecisionTree::fit(dataset.features(), dataset.labels(), max_depth as usize);
    Ok(FittedModel {
        candidate: CandidateModel::decision_tree(max_depth),
        seed,
        n_features: dataset.n_features(),
        params: Params::Tree(tree),
    })
}

pub fn fit_poly_krc(dataset: &Dataset, degree: u32, lambda: f64, seed: u64) -> Result<FittedModel> {
    ensure_nonempty(dataset)?;
    let candidate = CandidateModel::poly_krc(degree, lambda);
    candidate.validate()?;
    let expansion = krc::fit(dataset.features(), dataset.labels(), degree, lambda)?;
    Ok(FittedModel {
        candidate,
        seed,
        n_features: dataset.n_features(),
        params: Params::Kernel(expansion),
    })
}

pub fn fit_poly_svm(dataset: &Dataset, degree: u32, lambda: f64, epochs: u32, seed: u64) -> Result<FittedModel> {
    ensure_nonempty(dataset)?;
    let candidate = CandidateModel::poly_svm(degree, lambda, epochs);
    candidate.validate()?;
    let expansion = svm::fit(dataset.features(), dataset.labels(), degree, lambda, epochs, seed);
    Ok(FittedModel {
        candidate,
        seed,
        n_features: dataset.n_features(),
        params: Params::Kernel(expansion),
    })
}

/// Fits whatever `candidate` describes.
pub fn fit(candidate: &CandidateModel, dataset: &Dataset, seed: u64) -> Result<FittedModel> {
    match candidate.algorithm {
        Algorithm::DecisionTree => fit_decision_tree(dataset, candidate.capacity, seed),
        Algorithm::PolyKrc => fit_poly_krc(dataset, candidate.capacity, candidate.regularization, seed),
        Algorithm::PolySvm => fit_poly_svm(
            dataset,
            candidate.capacity,
            candidate.regularization,
            candidate.epochs,
            seed,
        ),
    }
}

pub fn predict(model: &FittedModel, features: &DMatrix<f64>) -> Result<Vec<u8>> {
    if features.ncols() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            got: features.ncols(),
        });
    }
    Ok(match &model.params {
        Params::Tree(tree) => (0..features.nrows())
            .map(|row| tree.predict_row(features, row))
            .collect(),
        Params::Kernel(expansion) => expansion
            .decision_values(features)
            .iter()
            .map(|&v| u8::from(v > 0.0))
            .collect(),
    })
}

/// Counts model fits performed on behalf of one strategy or job.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitTally {
    pub fits: u64,
}

impl FitTally {
    pub fn fit(&mut self, candidate: &CandidateModel, dataset: &Dataset, seed: u64) -> Result<FittedModel> {
        self.fits += 1;
        fit(candidate, dataset, seed)
    }

    pub fn merge(&mut self, other: FitTally) {
        self.fits += other.fits;
    }
}
