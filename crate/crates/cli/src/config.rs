//! The experiment config document and its fully resolved form.
//!
//! A config names datasets (synthetic specs or CSV files), candidate grids per
//! algorithm and the nested-CV settings. Every cell of
//! `datasets x algorithms x k_inner` becomes one paired comparison.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mutsel_core::data::{load_csv, make_synthetic, Dataset, LabelColumn, SyntheticSpec};
use mutsel_core::harness::{ExperimentConfig, OuterPlan, ResourceModel, DEFAULT_K_INNER};
use mutsel_core::learners::{Algorithm, CandidateModel};
use mutsel_core::selection::MvConfig;

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "MUTSEL_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<LabelColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CapacityGrid {
    List(Vec<u32>),
    Range { min: u32, max: u32 },
}

impl CapacityGrid {
    fn values(&self) -> Vec<u32> {
        match self {
            CapacityGrid::List(v) => v.iter().copied().collect::<BTreeSet<_>>().into_iter().collect(),
            CapacityGrid::Range { min, max } => (*min..=*max).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub algorithm: Algorithm,
    pub capacities: CapacityGrid,
    #[serde(default)]
    pub regularization: Option<f64>,
    #[serde(default)]
    pub epochs: Option<u32>,
}

fn default_workers() -> usize {
    1
}

fn default_k_inner() -> Vec<usize> {
    vec![DEFAULT_K_INNER]
}

/// The config document as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub outer: OuterPlan,
    #[serde(default = "default_k_inner")]
    pub k_inner: Vec<usize>,
    #[serde(default)]
    pub mv: MvConfig,
    #[serde(default)]
    pub stratified: bool,
    #[serde(default)]
    pub feature_k: Option<usize>,
    #[serde(default)]
    pub resource_model: ResourceModel,
    pub datasets: Vec<DatasetEntry>,
    pub algorithms: Vec<AlgorithmEntry>,
}

/// A dataset entry with its name fixed and its CSV path made absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedDataset {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_column: Option<LabelColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedAlgorithm {
    pub algorithm: Algorithm,
    pub candidates: Vec<CandidateModel>,
}

/// Every setting spelled out; this is what gets hashed and recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub seed: u64,
    pub outer: OuterPlan,
    pub k_inner: Vec<usize>,
    pub mv: MvConfig,
    pub stratified: bool,
    pub feature_k: Option<usize>,
    pub resource_model: ResourceModel,
    pub datasets: Vec<ResolvedDataset>,
    pub algorithms: Vec<ResolvedAlgorithm>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Seed precedence: explicit flag, then the environment, then the file.
    pub fn apply_seed_override(&mut self, flag: Option<u64>, env: Option<&str>) -> Result<()> {
        if let Some(seed) = flag {
            self.seed = seed;
        } else if let Some(raw) = env {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={raw:?} is not an unsigned integer")))?;
        }
        Ok(())
    }

    /// Validates the document and materialises every default. Relative CSV
    /// paths are taken relative to `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedConfig> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.datasets.is_empty() {
            return bad("datasets: at least one dataset is required".into());
        }
        if self.algorithms.is_empty() {
            return bad("algorithms: at least one algorithm is required".into());
        }
        if self.k_inner.is_empty() {
            return bad("k_inner: at least one value is required".into());
        }
        if self.workers == 0 {
            return bad("workers: must be at least 1".into());
        }

        let mut datasets = Vec::new();
        let mut names = BTreeSet::new();
        for (i, d) in self.datasets.iter().enumerate() {
            let resolved = match (&d.synthetic, &d.csv) {
                (Some(spec), None) => {
                    if d.label_column.is_some() {
                        return bad(format!("datasets[{i}]: label_column only applies to csv datasets"));
                    }
                    ResolvedDataset {
                        name: d.name.clone().unwrap_or_else(|| spec.default_name()),
                        synthetic: Some(spec.clone()),
                        csv: None,
                        label_column: None,
                    }
                }
                (None, Some(path)) => {
                    let path = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
                    ResolvedDataset {
                        name: d.name.clone().or(stem).unwrap_or_else(|| format!("dataset{i}")),
                        synthetic: None,
                        csv: Some(path),
                        label_column: Some(d.label_column.clone().unwrap_or_default()),
                    }
                }
                _ => return bad(format!("datasets[{i}]: exactly one of `synthetic` or `csv` is required")),
            };
            if !names.insert(resolved.name.clone()) {
                return bad(format!("datasets[{i}]: duplicate dataset name {:?}", resolved.name));
            }
            datasets.push(resolved);
        }

        let mut algorithms = Vec::new();
        for (i, a) in self.algorithms.iter().enumerate() {
            let capacities = a.capacities.values();
            if capacities.is_empty() {
                return bad(format!("algorithms[{i}].capacities: empty grid"));
            }
            let template = match a.algorithm {
                Algorithm::DecisionTree => CandidateModel::decision_tree(1),
                Algorithm::PolyKrc => CandidateModel::poly_krc(1, a.regularization.unwrap_or(a.algorithm.default_regularization())),
                Algorithm::PolySvm => CandidateModel::poly_svm(
                    1,
                    a.regularization.unwrap_or(a.algorithm.default_regularization()),
                    a.epochs.unwrap_or(mutsel_core::learners::DEFAULT_SVM_EPOCHS),
                ),
            };
            if a.algorithm == Algorithm::DecisionTree && (a.regularization.is_some() || a.epochs.is_some()) {
                return bad(format!("algorithms[{i}]: decision_tree takes no regularization or epochs"));
            }
            if a.algorithm == Algorithm::PolyKrc && a.epochs.is_some() {
                return bad(format!("algorithms[{i}]: poly_krc takes no epochs"));
            }
            let candidates: Vec<CandidateModel> = capacities
                .into_iter()
                .map(|capacity| CandidateModel { capacity, ..template })
                .collect();
            for c in &candidates {
                c.validate().map_err(|e| CliError::Config(format!("algorithms[{i}]: {e}")))?;
            }
            algorithms.push(ResolvedAlgorithm {
                algorithm: a.algorithm,
                candidates,
            });
        }

        let resolved = ResolvedConfig {
            seed: self.seed,
            outer: self.outer,
            k_inner: self.k_inner.clone(),
            mv: self.mv,
            stratified: self.stratified,
            feature_k: self.feature_k,
            resource_model: self.resource_model,
            datasets,
            algorithms,
        };
        for k in &resolved.k_inner {
            resolved
                .experiment(&resolved.algorithms[0], *k, 1)
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(resolved)
    }
}

impl ResolvedConfig {
    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex(&Sha256::digest(&bytes))
    }

    pub fn experiment(&self, algorithm: &ResolvedAlgorithm, k_inner: usize, workers: usize) -> ExperimentConfig {
        ExperimentConfig {
            candidates: algorithm.candidates.clone(),
            outer: self.outer,
            k_inner,
            mv: self.mv,
            seed: self.seed,
            feature_k: self.feature_k,
            stratified: self.stratified,
            resource_model: self.resource_model,
            workers,
        }
    }

    /// Loads every dataset; fails on the first one that cannot be read.
    pub fn load_datasets(&self) -> Result<Vec<Dataset>> {
        self.datasets
            .iter()
            .map(|d| {
                let loaded = match (&d.synthetic, &d.csv) {
                    (Some(spec), _) => make_synthetic(spec),
                    (None, Some(path)) => load_csv(path, d.label_column.as_ref().expect("resolved")),
                    (None, None) => unreachable!("resolved datasets have a source"),
                };
                loaded
                    .map(|ds| ds.with_name(d.name.clone()))
                    .map_err(|e| CliError::Data(format!("dataset {:?}: {e}", d.name)))
            })
            .collect()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
