//! `run`: paired comparisons for every configured cell.

use std::path::{Path, PathBuf};

use mutsel_core::data::Dataset;
use mutsel_core::harness::{run_paired_comparison, PairedComparisonResult, ResourceReport};
use mutsel_core::selection::StrategyKind;

use crate::config::{ResolvedConfig, RunConfig, SEED_ENV};
use crate::error::{CliError, Result};
use crate::manifest::{
    create_dir, now, slug, write_csv, write_json, DatasetFingerprint, FailedCell, OutputFile, RunManifest,
};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

/// Config loaded, overridden, resolved, with datasets in memory.
pub(crate) struct Prepared {
    pub resolved: ResolvedConfig,
    pub hash: String,
    pub workers: usize,
    pub datasets: Vec<Dataset>,
    pub started_at: String,
}

pub(crate) fn prepare(config_path: &Path, workers: Option<usize>, seed: Option<u64>) -> Result<Prepared> {
    let started_at = now();
    let mut config = RunConfig::from_path(config_path)?;
    let env = std::env::var(SEED_ENV).ok();
    config.apply_seed_override(seed, env.as_deref())?;
    if let Some(w) = workers {
        config.workers = w;
    }
    let base = config_path.parent().unwrap_or(Path::new("."));
    let resolved = config.resolve(base)?;
    let datasets = resolved.load_datasets()?;
    Ok(Prepared {
        hash: resolved.hash(),
        workers: config.workers,
        resolved,
        datasets,
        started_at,
    })
}

/// One finished (or failed) cell.
pub(crate) struct CellRun {
    pub id: String,
    pub result: std::result::Result<PairedComparisonResult, String>,
}

/// Runs one cell and writes its result JSON and score CSV under `out/results`.
pub(crate) fn run_cell(
    prepared: &Prepared,
    out: &Path,
    dataset: &Dataset,
    algorithm: usize,
    k_inner: usize,
    feature_k: Option<usize>,
    outputs: &mut Vec<OutputFile>,
) -> Result<CellRun> {
    let alg = &prepared.resolved.algorithms[algorithm];
    let mut config = prepared.resolved.experiment(alg, k_inner, prepared.workers);
    let mut id = format!("{}__{}__k{}", slug(dataset.name()), alg.algorithm.as_str(), k_inner);
    if let Some(k) = feature_k {
        config.feature_k = Some(k);
        id.push_str(&format!("__K{k}"));
    }
    let result = match run_paired_comparison(&config, dataset) {
        Ok(mut r) => {
            r.config_hash = Some(prepared.hash.clone());
            let rel = PathBuf::from("results").join(format!("{id}.json"));
            write_json(&out.join(&rel), &r)?;
            outputs.push(OutputFile {
                path: rel,
                kind: "result".into(),
                cell: Some(id.clone()),
            });
            let rel = PathBuf::from("results").join(format!("{id}__scores.csv"));
            let file = std::fs::File::create(out.join(&rel)).map_err(|e| CliError::io(out.join(&rel), e))?;
            r.write_scores_csv(std::io::BufWriter::new(file))
                .map_err(|e| CliError::output(out.join(&rel), e))?;
            outputs.push(OutputFile {
                path: rel,
                kind: "scores".into(),
                cell: Some(id.clone()),
            });
            Ok(r)
        }
        Err(e) => Err(e.to_string()),
    };
    Ok(CellRun { id, result })
}

pub(crate) fn resource_rows(cells: &[CellRun], hash: &str) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for cell in cells {
        let Ok(r) = &cell.result else { continue };
        for (kind, res) in [(StrategyKind::Cv, &r.resources.cv), (StrategyKind::Mv, &r.resources.mv)] {
            for (phase, rep) in [("selection", &res.selection), ("evaluation", &res.evaluation), ("total", &res.total)] {
                rows.push(resource_row(&cell.id, &r.dataset, r.k_inner, kind, phase, rep, hash));
            }
        }
    }
    rows
}

pub(crate) const RESOURCE_HEADER: [&str; 10] = [
    "cell",
    "dataset",
    "k_inner",
    "strategy",
    "phase",
    "wall_clock_seconds",
    "model_fits",
    "co2_grams",
    "source",
    "config_hash",
];

fn resource_row(
    cell: &str,
    dataset: &str,
    k_inner: usize,
    kind: StrategyKind,
    phase: &str,
    rep: &ResourceReport,
    hash: &str,
) -> Vec<String> {
    vec![
        cell.to_string(),
        dataset.to_string(),
        k_inner.to_string(),
        kind.as_str().to_string(),
        phase.to_string(),
        rep.wall_clock_seconds.to_string(),
        rep.model_fits.to_string(),
        rep.co2_grams.to_string(),
        format!("results/{cell}.json"),
        hash.to_string(),
    ]
}

pub(crate) fn finish(
    command: &str,
    prepared: &Prepared,
    out: &Path,
    cells: &[CellRun],
    mut outputs: Vec<OutputFile>,
) -> Result<RunManifest> {
    let rel = PathBuf::from("resources.csv");
    write_csv(&out.join(&rel), &RESOURCE_HEADER, &resource_rows(cells, &prepared.hash))?;
    outputs.push(OutputFile {
        path: rel,
        kind: "resources".into(),
        cell: None,
    });
    let manifest = RunManifest {
        command: command.to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: prepared.hash.clone(),
        started_at: prepared.started_at.clone(),
        finished_at: now(),
        workers: prepared.workers,
        config: prepared.resolved.clone(),
        datasets: prepared.datasets.iter().map(DatasetFingerprint::of).collect(),
        outputs,
        failed_cells: cells
            .iter()
            .filter_map(|c| {
                c.result.as_ref().err().map(|e| FailedCell {
                    cell: c.id.clone(),
                    error: e.clone(),
                })
            })
            .collect(),
        n_cells: cells.len(),
    };
    write_json(&out.join(RunManifest::FILE_NAME), &manifest)?;
    Ok(manifest)
}

/// Runs every `dataset x algorithm x k_inner` cell. The returned manifest may
/// list failed cells; callers decide how to surface a partial run.
pub fn cmd_run(opts: &RunOptions) -> Result<RunManifest> {
    let prepared = prepare(&opts.config, opts.workers, opts.seed)?;
    create_dir(&opts.out.join("results"))?;
    let mut outputs = Vec::new();
    let mut cells = Vec::new();
    for dataset in &prepared.datasets {
        for a in 0..prepared.resolved.algorithms.len() {
            for &k in &prepared.resolved.k_inner {
                cells.push(run_cell(&prepared, &opts.out, dataset, a, k, None, &mut outputs)?);
            }
        }
    }
    finish("run", &prepared, &opts.out, &cells, outputs)
}
