//! `sweep-features`: paired comparisons over nested ANOVA feature subsets.

use std::path::PathBuf;

use mutsel_core::bayes::{CorrelatedTModel, RopeInterval};
use mutsel_core::selection::StrategyKind;

use crate::error::{CliError, Result};
use crate::manifest::{write_csv, OutputFile, RunManifest};
use crate::run::{finish, prepare, run_cell, CellRun};
use crate::stats::Summary;

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub config: PathBuf,
    pub k_list: Vec<usize>,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub rope: RopeInterval,
}

/// Parses `K1,K2,...`.
pub fn parse_k_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad K value {p:?}")))
        .collect()
}

pub fn cmd_sweep_features(opts: &SweepOptions) -> Result<RunManifest> {
    if opts.k_list.is_empty() {
        return Err(CliError::Config("k: at least one value is required".into()));
    }
    let prepared = prepare(&opts.config, opts.workers, opts.seed)?;
    for d in &prepared.datasets {
        if let Some(&k) = opts.k_list.iter().find(|&&k| k == 0 || k > d.n_features()) {
            return Err(CliError::Config(format!(
                "k: {k} is outside 1..={} for dataset {:?}",
                d.n_features(),
                d.name()
            )));
        }
    }
    crate::manifest::create_dir(&opts.out.join("results"))?;

    let mut outputs = Vec::new();
    let mut cells: Vec<(usize, usize, usize, CellRun)> = Vec::new();
    for dataset in &prepared.datasets {
        for a in 0..prepared.resolved.algorithms.len() {
            for &k_inner in &prepared.resolved.k_inner {
                for &k in &opts.k_list {
                    let cell = run_cell(&prepared, &opts.out, dataset, a, k_inner, Some(k), &mut outputs)?;
                    cells.push((a, k_inner, k, cell));
                }
            }
        }
    }

    let mut posterior_rows = Vec::new();
    let mut capacity_rows = Vec::new();
    for (a, k_inner, k, cell) in &cells {
        let Ok(r) = &cell.result else { continue };
        let alg = prepared.resolved.algorithms[*a].algorithm.as_str().to_string();
        let triple = CorrelatedTModel::from_diffs(&r.diff, r.rho)
            .map_err(|e| CliError::Data(format!("{}: {e}", cell.id)))?
            .triple(&opts.rope);
        posterior_rows.push(vec![
            r.dataset.clone(),
            alg.clone(),
            k_inner.to_string(),
            k.to_string(),
            triple.p_cv.to_string(),
            triple.p_pe.to_string(),
            triple.p_mv.to_string(),
            prepared.hash.clone(),
        ]);
        for kind in [StrategyKind::Cv, StrategyKind::Mv] {
            let caps: Vec<f64> = r.choices(kind).iter().flatten().map(|c| c.capacity as f64).collect();
            let s = Summary::of(&caps);
            capacity_rows.push(vec![
                r.dataset.clone(),
                alg.clone(),
                k_inner.to_string(),
                k.to_string(),
                kind.as_str().to_string(),
                s.map(|s| s.mean.to_string()).unwrap_or_default(),
                s.map(|s| s.std.to_string()).unwrap_or_default(),
                s.map(|s| s.n.to_string()).unwrap_or_else(|| "0".into()),
                prepared.hash.clone(),
            ]);
        }
    }
    let rel = PathBuf::from("posterior_vs_k.csv");
    write_csv(
        &opts.out.join(&rel),
        &["dataset", "algorithm", "k_inner", "K", "p_cv", "p_pe", "p_mv", "config_hash"],
        &posterior_rows,
    )?;
    outputs.push(OutputFile {
        path: rel,
        kind: "posterior_curve".into(),
        cell: None,
    });
    let rel = PathBuf::from("capacity_vs_k.csv");
    write_csv(
        &opts.out.join(&rel),
        &["dataset", "algorithm", "k_inner", "K", "strategy", "mean_capacity", "std_capacity", "n", "config_hash"],
        &capacity_rows,
    )?;
    outputs.push(OutputFile {
        path: rel,
        kind: "capacity_curve".into(),
        cell: None,
    });
    let runs: Vec<CellRun> = cells.into_iter().map(|(_, _, _, c)| c).collect();
    finish("sweep-features", &prepared, &opts.out, &runs, outputs)
}
