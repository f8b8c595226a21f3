//! `report`: Bayesian analysis over finished result files.
//!
//! Produces per-result correlated t-test triples, a hierarchical triple over
//! all inputs (and one per algorithm / inner-k group with at least two
//! inputs), capacity summaries and a resource table. The output depends only
//! on the input files and the options.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mutsel_core::bayes::{
    hierarchical_test_models, CorrelatedTModel, PosteriorTriple, RopeInterval, TwoLevelMonteCarlo, DEFAULT_POSTERIOR_SAMPLES,
    DIFF_CONVENTION,
};
use mutsel_core::harness::PairedComparisonResult;
use mutsel_core::seed::derive_seed;
use mutsel_core::selection::StrategyKind;

use crate::error::{CliError, Result};
use crate::manifest::{create_dir, write_csv, write_json, RunManifest};
use crate::stats::Summary;

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub inputs: Vec<PathBuf>,
    pub rope: RopeInterval,
    pub out: PathBuf,
    pub n_samples: usize,
    pub seed: u64,
}

impl ReportOptions {
    pub fn new(inputs: Vec<PathBuf>, out: PathBuf) -> Self {
        Self {
            inputs,
            rope: RopeInterval::default(),
            out,
            n_samples: DEFAULT_POSTERIOR_SAMPLES,
            seed: 0,
        }
    }
}

/// A loaded result and where it came from.
pub struct LoadedResult {
    pub source: String,
    pub result: PairedComparisonResult,
}

impl LoadedResult {
    pub fn config_hash(&self) -> &str {
        self.result.config_hash.as_deref().unwrap_or("")
    }

    pub fn algorithm(&self) -> &'static str {
        let first = self.result.candidates.first().map(|c| c.algorithm);
        if self.result.candidates.iter().all(|c| Some(c.algorithm) == first) {
            first.map(|a| a.as_str()).unwrap_or("none")
        } else {
            "mixed"
        }
    }

    pub fn group(&self) -> String {
        let mut g = format!("{}__k{}", self.algorithm(), self.result.k_inner);
        if self.result.selected_features.is_some() {
            g.push_str(&format!("__K{}", self.result.n_features));
        }
        g
    }
}

fn read_result(path: &Path, source: String) -> Result<LoadedResult> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let result: PairedComparisonResult = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{} is not a result file: {e}", path.display())))?;
    Ok(LoadedResult { source, result })
}

/// Reads result files; a directory stands for every result in its manifest.
pub fn load_results(inputs: &[PathBuf]) -> Result<Vec<LoadedResult>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let manifest = RunManifest::read(&input.join(RunManifest::FILE_NAME))?;
            for f in manifest.result_files() {
                let path = input.join(&f.path);
                out.push(read_result(&path, path.display().to_string())?);
            }
        } else {
            out.push(read_result(input, input.display().to_string())?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("report: no result files given".into()));
    }
    if let Some(bad) = out.iter().find(|r| r.result.sign_convention != DIFF_CONVENTION) {
        return Err(CliError::Data(format!(
            "{} uses sign convention {:?}; expected {DIFF_CONVENTION:?}",
            bad.source, bad.result.sign_convention
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub source: String,
    pub config_hash: String,
    pub dataset: String,
    pub algorithm: String,
    pub k_inner: usize,
    pub n_features: usize,
    pub n_diffs: usize,
    pub failed_iterations: usize,
    pub rho: f64,
    pub mean_diff: f64,
    pub triple: PosteriorTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalSummary {
    pub group: String,
    pub n_datasets: usize,
    pub n_samples: usize,
    pub triple: PosteriorTriple,
    pub config_hashes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySummary {
    pub source: String,
    pub config_hash: String,
    pub dataset: String,
    pub algorithm: String,
    pub k_inner: usize,
    pub strategy: StrategyKind,
    pub capacity: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub source: String,
    pub config_hash: String,
    pub dataset: String,
    pub algorithm: String,
    pub k_inner: usize,
    pub strategy: StrategyKind,
    pub selection_seconds: f64,
    pub selection_fits: u64,
    pub evaluation_seconds: f64,
    pub evaluation_fits: u64,
    pub total_seconds: f64,
    pub total_co2_grams: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub toolkit_version: String,
    pub sign_convention: String,
    pub rope: RopeInterval,
    pub posterior_samples: usize,
    pub seed: u64,
    pub inputs: Vec<InputSummary>,
    pub hierarchical: Option<HierarchicalSummary>,
    pub hierarchical_by_group: Vec<HierarchicalSummary>,
    pub capacity: Vec<CapacitySummary>,
    pub resources: Vec<ResourceRow>,
    pub outputs: Vec<PathBuf>,
}

fn model_of(r: &LoadedResult) -> Result<CorrelatedTModel> {
    CorrelatedTModel::from_diffs(&r.result.diff, r.result.rho).map_err(|e| CliError::Data(format!("{}: {e}", r.source)))
}

fn unique_hashes(results: &[&LoadedResult]) -> Vec<String> {
    let mut v: Vec<String> = results.iter().map(|r| r.config_hash().to_string()).collect();
    v.sort();
    v.dedup();
    v
}

struct Hierarchical {
    summary: HierarchicalSummary,
    samples: Vec<(f64, &'static str)>,
}

fn hierarchical(group: &str, results: &[&LoadedResult], opts: &ReportOptions, seed: u64) -> Result<Hierarchical> {
    let models = results.iter().map(|r| model_of(r)).collect::<Result<Vec<_>>>()?;
    let h = hierarchical_test_models(&models, &opts.rope, opts.n_samples, seed, &TwoLevelMonteCarlo)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Hierarchical {
        summary: HierarchicalSummary {
            group: group.to_string(),
            n_datasets: results.len(),
            n_samples: opts.n_samples,
            triple: h.triple,
            config_hashes: unique_hashes(results),
        },
        samples: h.samples.iter().map(|s| (s.value, s.region.as_str())).collect(),
    })
}

fn f(v: f64) -> String {
    v.to_string()
}

/// Analyses already-loaded results and writes the report files.
pub fn build_report(results: &[LoadedResult], opts: &ReportOptions) -> Result<ReportSummary> {
    if opts.n_samples < 1000 {
        return Err(CliError::Config(format!("samples: {} < 1000", opts.n_samples)));
    }
    create_dir(&opts.out)?;

    let mut inputs = Vec::new();
    for r in results {
        let model = model_of(r)?;
        inputs.push(InputSummary {
            source: r.source.clone(),
            config_hash: r.config_hash().to_string(),
            dataset: r.result.dataset.clone(),
            algorithm: r.algorithm().to_string(),
            k_inner: r.result.k_inner,
            n_features: r.result.n_features,
            n_diffs: model.n,
            failed_iterations: r.result.failed_iterations,
            rho: r.result.rho,
            mean_diff: model.mean,
            triple: model.triple(&opts.rope),
        });
    }

    let all: Vec<&LoadedResult> = results.iter().collect();
    let overall = if all.len() >= 2 {
        Some(hierarchical("all", &all, opts, opts.seed)?)
    } else {
        None
    };
    let mut groups: BTreeMap<String, Vec<&LoadedResult>> = BTreeMap::new();
    for r in results {
        groups.entry(r.group()).or_default().push(r);
    }
    let mut by_group = Vec::new();
    for (i, (name, members)) in groups.iter().enumerate() {
        if members.len() >= 2 {
            by_group.push(hierarchical(name, members, opts, derive_seed(opts.seed, &[i as u64 + 1]))?);
        }
    }

    let mut capacity = Vec::new();
    let mut resources = Vec::new();
    for r in results {
        for kind in [StrategyKind::Cv, StrategyKind::Mv] {
            let caps: Vec<f64> = r.result.choices(kind).iter().flatten().map(|c| c.capacity as f64).collect();
            if let Some(s) = Summary::of(&caps) {
                capacity.push(CapacitySummary {
                    source: r.source.clone(),
                    config_hash: r.config_hash().to_string(),
                    dataset: r.result.dataset.clone(),
                    algorithm: r.algorithm().to_string(),
                    k_inner: r.result.k_inner,
                    strategy: kind,
                    capacity: s,
                });
            }
            let res = match kind {
                StrategyKind::Cv => &r.result.resources.cv,
                StrategyKind::Mv => &r.result.resources.mv,
            };
            resources.push(ResourceRow {
                source: r.source.clone(),
                config_hash: r.config_hash().to_string(),
                dataset: r.result.dataset.clone(),
                algorithm: r.algorithm().to_string(),
                k_inner: r.result.k_inner,
                strategy: kind,
                selection_seconds: res.selection.wall_clock_seconds,
                selection_fits: res.selection.model_fits,
                evaluation_seconds: res.evaluation.wall_clock_seconds,
                evaluation_fits: res.evaluation.model_fits,
                total_seconds: res.total.wall_clock_seconds,
                total_co2_grams: res.total.co2_grams,
            });
        }
    }

    let out = &opts.out;
    let mut outputs = Vec::new();
    let mut emit = |name: &str| {
        outputs.push(PathBuf::from(name));
        out.join(name)
    };

    write_csv(
        &emit("per_dataset.csv"),
        &["source", "dataset", "algorithm", "k_inner", "n_features", "n_diffs", "failed_iterations", "mean_diff", "p_cv", "p_pe", "p_mv", "config_hash"],
        &inputs
            .iter()
            .map(|s| {
                vec![
                    s.source.clone(),
                    s.dataset.clone(),
                    s.algorithm.clone(),
                    s.k_inner.to_string(),
                    s.n_features.to_string(),
                    s.n_diffs.to_string(),
                    s.failed_iterations.to_string(),
                    f(s.mean_diff),
                    f(s.triple.p_cv),
                    f(s.triple.p_pe),
                    f(s.triple.p_mv),
                    s.config_hash.clone(),
                ]
            })
            .collect::<Vec<_>>(),
    )?;

    let hier: Vec<&Hierarchical> = overall.iter().chain(by_group.iter()).collect();
    write_csv(
        &emit("hierarchical.csv"),
        &["group", "n_datasets", "n_samples", "p_cv", "p_pe", "p_mv", "config_hash"],
        &hier
            .iter()
            .map(|h| {
                let s = &h.summary;
                vec![
                    s.group.clone(),
                    s.n_datasets.to_string(),
                    s.n_samples.to_string(),
                    f(s.triple.p_cv),
                    f(s.triple.p_pe),
                    f(s.triple.p_mv),
                    s.config_hashes.join(";"),
                ]
            })
            .collect::<Vec<_>>(),
    )?;

    let mut sample_rows = Vec::new();
    for h in &hier {
        let hashes = h.summary.config_hashes.join(";");
        for (i, (value, region)) in h.samples.iter().enumerate() {
            sample_rows.push(vec![h.summary.group.clone(), i.to_string(), f(*value), region.to_string(), hashes.clone()]);
        }
    }
    write_csv(
        &emit("posterior_samples.csv"),
        &["group", "sample_index", "value", "region", "config_hash"],
        &sample_rows,
    )?;

    write_csv(
        &emit("capacity.csv"),
        &["source", "dataset", "algorithm", "k_inner", "strategy", "n", "median", "q1", "q3", "mean", "std", "min", "max", "config_hash"],
        &capacity
            .iter()
            .map(|c| {
                let s = &c.capacity;
                vec![
                    c.source.clone(),
                    c.dataset.clone(),
                    c.algorithm.clone(),
                    c.k_inner.to_string(),
                    c.strategy.as_str().to_string(),
                    s.n.to_string(),
                    f(s.median),
                    f(s.q1),
                    f(s.q3),
                    f(s.mean),
                    f(s.std),
                    f(s.min),
                    f(s.max),
                    c.config_hash.clone(),
                ]
            })
            .collect::<Vec<_>>(),
    )?;

    write_csv(
        &emit("resources.csv"),
        &[
            "source", "dataset", "algorithm", "k_inner", "strategy", "selection_seconds", "selection_fits",
            "evaluation_seconds", "evaluation_fits", "total_seconds", "total_co2_grams", "config_hash",
        ],
        &resources
            .iter()
            .map(|r| {
                vec![
                    r.source.clone(),
                    r.dataset.clone(),
                    r.algorithm.clone(),
                    r.k_inner.to_string(),
                    r.strategy.as_str().to_string(),
                    f(r.selection_seconds),
                    r.selection_fits.to_string(),
                    f(r.evaluation_seconds),
                    r.evaluation_fits.to_string(),
                    f(r.total_seconds),
                    f(r.total_co2_grams),
                    r.config_hash.clone(),
                ]
            })
            .collect::<Vec<_>>(),
    )?;

    outputs.push(PathBuf::from("summary.json"));
    let summary = ReportSummary {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        sign_convention: DIFF_CONVENTION.to_string(),
        rope: opts.rope,
        posterior_samples: opts.n_samples,
        seed: opts.seed,
        inputs,
        hierarchical: overall.map(|h| h.summary),
        hierarchical_by_group: by_group.into_iter().map(|h| h.summary).collect(),
        capacity,
        resources,
        outputs,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn cmd_report(opts: &ReportOptions) -> Result<ReportSummary> {
    let results = load_results(&opts.inputs)?;
    build_report(&results, opts)
}

/// Parses `LO,HI`.
pub fn parse_rope(s: &str) -> std::result::Result<RopeInterval, String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    RopeInterval::new(lo, hi).map_err(|e| e.to_string())
}
