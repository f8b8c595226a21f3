//! Paired nested cross-validation between the MV and CV selection strategies.
//!
//! Every outer iteration (one fold of one repeat) hands the *same* outer
//! train/test split to both strategies. Each strategy picks a candidate using
//! only outer-train, the pick is refit on outer-train and scored on
//! outer-test. Outer iterations are independent jobs and run on a rayon pool;
//! all seeds derive from the master seed and the iteration coordinates, so
//! the result does not depend on the number of workers.

mod resources;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use resources::{
    measure, Measurement, ResourceModel, ResourceReport, ResourceSummary, StrategyResources,
    DEFAULT_CARBON_INTENSITY, DEFAULT_POWER_WATTS,
};

use crate::bayes::DIFF_CONVENTION;
use crate::data::{anova_f_scores, make_fold_plan, select_k_best, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::learners::{CandidateModel, FitTally, FittedModel};
use crate::seed::{derive_seed, mix64};
use crate::selection::{select_model, MvConfig, Strategy, StrategyKind};

const OUTER_TAG: u64 = 0x6f75_7465;
const SELECT_TAG: u64 = 0x7365_6c65;
const REFIT_TAG: u64 = 0x7265_6669;
const FINAL_TAG: u64 = 0x6669_6e61;

pub const DEFAULT_REPEATS: usize = 10;
pub const DEFAULT_K_OUTER: usize = 10;
pub const DEFAULT_K_INNER: usize = 5;
/// Largest share of failed outer iterations tolerated before a run aborts.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuterPlan {
    pub repeats: usize,
    pub k_outer: usize,
}

impl Default for OuterPlan {
    fn default() -> Self {
        Self {
            repeats: DEFAULT_REPEATS,
            k_outer: DEFAULT_K_OUTER,
        }
    }
}

impl OuterPlan {
    pub fn n_iterations(&self) -> usize {
        self.repeats * self.k_outer
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub candidates: Vec<CandidateModel>,
    pub outer: OuterPlan,
    pub k_inner: usize,
    pub mv: MvConfig,
    pub seed: u64,
    /// Keep only the K best features by ANOVA F-score before the run.
    pub feature_k: Option<usize>,
    /// Stratify both outer and inner fold plans.
    pub stratified: bool,
    pub resource_model: ResourceModel,
    /// Worker threads for outer iterations; 1 runs on the calling thread.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(candidates: Vec<CandidateModel>, seed: u64) -> Self {
        Self {
            candidates,
            outer: OuterPlan::default(),
            k_inner: DEFAULT_K_INNER,
            mv: MvConfig::default(),
            seed,
            feature_k: None,
            stratified: false,
            resource_model: ResourceModel::default(),
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates.is_empty() {
            return Err(Error::param("candidates", "empty candidate grid"));
        }
        for c in &self.candidates {
            c.validate()?;
        }
        if self.outer.repeats == 0 {
            return Err(Error::param("repeats", "must be at least 1"));
        }
        if self.outer.k_outer < 2 {
            return Err(Error::param("k_outer", "must be at least 2"));
        }
        if self.k_inner < 2 {
            return Err(Error::param("k_inner", "must be at least 2"));
        }
        if self.workers == 0 {
            return Err(Error::param("workers", "must be at least 1"));
        }
        if !(self.resource_model.power_watts >= 0.0 && self.resource_model.carbon_intensity_g_per_kwh >= 0.0) {
            return Err(Error::param("resource_model", "power and carbon intensity must be non-negative"));
        }
        self.mv.validate()
    }

    /// Correlation between outer-fold differences, the test fraction `1/k_outer`.
    pub fn rho(&self) -> f64 {
        1.0 / self.outer.k_outer as f64
    }
}

/// What one strategy did in one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyIteration {
    pub choice: Option<CandidateModel>,
    /// The winning inner score (mean CV accuracy or m).
    pub selection_score: Option<f64>,
    /// Accuracy of the refit choice on outer-test.
    pub test_score: Option<f64>,
    /// Digest of the outer train/test indices this strategy consumed.
    pub split_digest: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterIteration {
    pub index: usize,
    pub repeat: usize,
    pub fold: usize,
    pub cv: StrategyIteration,
    pub mv: StrategyIteration,
}

impl OuterIteration {
    pub fn failed(&self) -> bool {
        self.cv.test_score.is_none() || self.mv.test_score.is_none()
    }

    pub fn strategy(&self, kind: StrategyKind) -> &StrategyIteration {
        match kind {
            StrategyKind::Cv => &self.cv,
            StrategyKind::Mv => &self.mv,
        }
    }
}

/// Best-validating candidate of a strategy, refit on the whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalModel {
    pub candidate: CandidateModel,
    pub source_iteration: usize,
    pub validation_score: f64,
    #[serde(skip)]
    pub model: Option<FittedModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparisonResult {
    pub dataset: String,
    pub n_samples: usize,
    pub n_features: usize,
    /// Columns kept by feature selection, in original order.
    pub selected_features: Option<Vec<usize>>,
    pub candidates: Vec<CandidateModel>,
    pub seed: u64,
    pub repeats: usize,
    pub k_outer: usize,
    pub k_inner: usize,
    pub mv: MvConfig,
    pub rho: f64,
    pub sign_convention: String,
    /// One entry per outer iteration, `None` where the strategy failed.
    pub cv_scores: Vec<Option<f64>>,
    pub mv_scores: Vec<Option<f64>>,
    pub cv_choices: Vec<Option<CandidateModel>>,
    pub mv_choices: Vec<Option<CandidateModel>>,
    /// `mv - cv` over the iterations where both strategies succeeded.
    pub diff: Vec<f64>,
    /// Iteration index of every `diff` entry.
    pub diff_iterations: Vec<usize>,
    pub failed_iterations: usize,
    pub outer_plans: Vec<FoldPlan>,
    pub iterations: Vec<OuterIteration>,
    pub final_cv_model: FinalModel,
    pub final_mv_model: FinalModel,
    pub resources: ResourceSummary,
    pub config_hash: Option<String>,
}

impl PairedComparisonResult {
    pub fn scores(&self, kind: StrategyKind) -> &[Option<f64>] {
        match kind {
            StrategyKind::Cv => &self.cv_scores,
            StrategyKind::Mv => &self.mv_scores,
        }
    }

    pub fn choices(&self, kind: StrategyKind) -> &[Option<CandidateModel>] {
        match kind {
            StrategyKind::Cv => &self.cv_choices,
            StrategyKind::Mv => &self.mv_choices,
        }
    }

    /// Copy with every timing-derived field zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for s in [&mut out.resources.cv, &mut out.resources.mv] {
            for r in [&mut s.selection, &mut s.evaluation, &mut s.total] {
                r.wall_clock_seconds = 0.0;
                r.co2_grams = 0.0;
            }
        }
        out
    }

    /// Flat score table: one row per iteration and strategy.
    pub fn write_scores_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Io {
            path: "<scores csv>".into(),
            source: e.into(),
        };
        w.write_record(["iteration", "repeat", "fold", "strategy", "score", "algorithm", "capacity", "config_hash"])
            .map_err(csv_err)?;
        let hash = self.config_hash.clone().unwrap_or_default();
        for it in &self.iterations {
            for kind in [StrategyKind::Cv, StrategyKind::Mv] {
                let s = it.strategy(kind);
                w.write_record([
                    it.index.to_string(),
                    it.repeat.to_string(),
                    it.fold.to_string(),
                    kind.as_str().to_string(),
                    s.test_score.map(|v| v.to_string()).unwrap_or_default(),
                    s.choice.map(|c| c.algorithm.as_str().to_string()).unwrap_or_default(),
                    s.choice.map(|c| c.capacity.to_string()).unwrap_or_default(),
                    hash.clone(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| Error::Io {
            path: "<scores csv>".into(),
            source: e,
        })
    }
}

fn split_digest(train: &[usize], test: &[usize]) -> u64 {
    let mut h = mix64(train.len() as u64);
    for &i in train {
        h = mix64(h ^ i as u64);
    }
    h = mix64(h ^ u64::MAX);
    for &i in test {
        h = mix64(h ^ i as u64);
    }
    h
}

fn strategy_tag(kind: StrategyKind) -> u64 {
    match kind {
        StrategyKind::Cv => 1,
        StrategyKind::Mv => 2,
    }
}

/// Seed of the outer fold plan for `repeat`.
pub fn outer_plan_seed(master: u64, repeat: usize) -> u64 {
    derive_seed(master, &[OUTER_TAG, repeat as u64])
}

/// Seed handed to `select_model` by `kind` in outer iteration (`repeat`, `fold`).
pub fn selection_seed(master: u64, repeat: usize, fold: usize, kind: StrategyKind) -> u64 {
    derive_seed(master, &[SELECT_TAG, repeat as u64, fold as u64, strategy_tag(kind)])
}

struct JobOutput {
    iteration: OuterIteration,
    selection: [Measurement; 2],
    evaluation: [Measurement; 2],
}

fn run_strategy(
    config: &ExperimentConfig,
    strategy: &Strategy,
    train: &Dataset,
    test: &Dataset,
    coords: (usize, usize),
    digest: u64,
) -> (StrategyIteration, Measurement, Measurement) {
    let (repeat, fold) = coords;
    let kind = strategy.kind();
    let select_seed = selection_seed(config.seed, repeat, fold, kind);
    let (selected, sel) = measure(|t| select_model(&config.candidates, train, strategy, select_seed, t));
    let mut out = StrategyIteration {
        choice: None,
        selection_score: None,
        test_score: None,
        split_digest: digest,
        error: None,
    };
    let outcome = match selected {
        Ok(o) => o,
        Err(e) => {
            out.error = Some(e.to_string());
            return (out, sel, Measurement::default());
        }
    };
    out.choice = Some(outcome.chosen);
    out.selection_score = Some(outcome.chosen_score);
    // the refit seed leaves out the strategy so equal choices refit identically
    let refit_seed = derive_seed(
        config.seed,
        &[REFIT_TAG, repeat as u64, fold as u64, outcome.chosen.seed_key()],
    );
    let (scored, eval) = measure(|t| t.fit(&outcome.chosen, train, refit_seed).and_then(|m| m.accuracy(test)));
    match scored {
        Ok(acc) => out.test_score = Some(acc),
        Err(e) => out.error = Some(e.to_string()),
    }
    (out, sel, eval)
}

fn run_job(config: &ExperimentConfig, dataset: &Dataset, plan: &FoldPlan, repeat: usize, fold: usize) -> JobOutput {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    let train = dataset.subset(&train_idx);
    let test = dataset.subset(&test_idx);
    let digest = split_digest(&train_idx, &test_idx);
    let cv_strategy = Strategy::Cv {
        k: config.k_inner,
        stratified: config.stratified,
    };
    let mv_strategy = Strategy::Mv(config.mv);
    let (cv, cv_sel, cv_eval) = run_strategy(config, &cv_strategy, &train, &test, (repeat, fold), digest);
    let (mv, mv_sel, mv_eval) = run_strategy(config, &mv_strategy, &train, &test, (repeat, fold), digest);
    JobOutput {
        iteration: OuterIteration {
            index: repeat * config.outer.k_outer + fold,
            repeat,
            fold,
            cv,
            mv,
        },
        selection: [cv_sel, mv_sel],
        evaluation: [cv_eval, mv_eval],
    }
}

fn final_model(
    config: &ExperimentConfig,
    dataset: &Dataset,
    iterations: &[OuterIteration],
    kind: StrategyKind,
) -> Result<(FinalModel, Measurement)> {
    let mut best: Option<(usize, f64, CandidateModel)> = None;
    for it in iterations {
        let s = it.strategy(kind);
        if let (Some(score), Some(choice)) = (s.test_score, s.choice) {
            // strictly greater keeps the earliest iteration among ties
            if best.is_none_or(|(_, b, _)| score > b) {
                best = Some((it.index, score, choice));
            }
        }
    }
    let Some((source_iteration, validation_score, candidate)) = best else {
        return Err(Error::InvalidDataset(format!(
            "no successful outer iteration for {}",
            kind.as_str()
        )));
    };
    let seed = derive_seed(config.seed, &[FINAL_TAG, candidate.seed_key()]);
    let (model, m) = measure(|t: &mut FitTally| t.fit(&candidate, dataset, seed));
    Ok((
        FinalModel {
            candidate,
            source_iteration,
            validation_score,
            model: Some(model?),
        },
        m,
    ))
}

/// Runs `repeats x k_outer` paired outer iterations on `dataset`.
pub fn run_paired_comparison(config: &ExperimentConfig, dataset: &Dataset) -> Result<PairedComparisonResult> {
    config.validate()?;
    dataset.ensure_trainable()?;
    let (dataset, selected_features) = match config.feature_k {
        Some(k) => {
            let table = anova_f_scores(dataset)?;
            let reduced = select_k_best(dataset, &table, k)?;
            let mut cols = table.ranking[..k].to_vec();
            cols.sort_unstable();
            (reduced, Some(cols))
        }
        None => (dataset.clone(), None),
    };

    let plans: Vec<FoldPlan> = (0..config.outer.repeats)
        .map(|r| {
            make_fold_plan(
                &dataset,
                config.outer.k_outer,
                outer_plan_seed(config.seed, r),
                config.stratified,
            )
        })
        .collect::<Result<_>>()?;
    let coords: Vec<(usize, usize)> = (0..config.outer.repeats)
        .flat_map(|r| (0..config.outer.k_outer).map(move |f| (r, f)))
        .collect();

    let job = |&(r, f): &(usize, usize)| run_job(config, &dataset, &plans[r], r, f);
    let outputs: Vec<JobOutput> = if config.workers == 1 {
        coords.iter().map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::param("workers", e.to_string()))?;
        pool.install(|| coords.par_iter().map(job).collect())
    };

    let mut selection = [Measurement::default(); 2];
    let mut evaluation = [Measurement::default(); 2];
    let mut iterations = Vec::with_capacity(outputs.len());
    for out in outputs {
        for s in 0..2 {
            selection[s].merge(out.selection[s]);
            evaluation[s].merge(out.evaluation[s]);
        }
        iterations.push(out.iteration);
    }

    let total = iterations.len();
    let failures: Vec<&OuterIteration> = iterations.iter().filter(|it| it.failed()).collect();
    if failures.len() as f64 > MAX_FAILURE_FRACTION * total as f64 {
        let first = failures[0];
        let msg = first.cv.error.clone().or_else(|| first.mv.error.clone()).unwrap_or_default();
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total,
            first: format!("iteration {} (repeat {}, fold {}): {msg}", first.index, first.repeat, first.fold),
        });
    }
    let failed_iterations = failures.len();

    let mut diff = Vec::new();
    let mut diff_iterations = Vec::new();
    for it in &iterations {
        if let (Some(mv), Some(cv)) = (it.mv.test_score, it.cv.test_score) {
            diff.push(mv - cv);
            diff_iterations.push(it.index);
        }
    }

    let (final_cv_model, cv_final) = final_model(config, &dataset, &iterations, StrategyKind::Cv)?;
    let (final_mv_model, mv_final) = final_model(config, &dataset, &iterations, StrategyKind::Mv)?;
    evaluation[0].merge(cv_final);
    evaluation[1].merge(mv_final);

    let rm = &config.resource_model;
    Ok(PairedComparisonResult {
        dataset: dataset.name().to_string(),
        n_samples: dataset.n_samples(),
        n_features: dataset.n_features(),
        selected_features,
        candidates: config.candidates.clone(),
        seed: config.seed,
        repeats: config.outer.repeats,
        k_outer: config.outer.k_outer,
        k_inner: config.k_inner,
        mv: config.mv,
        rho: config.rho(),
        sign_convention: DIFF_CONVENTION.to_string(),
        cv_scores: iterations.iter().map(|it| it.cv.test_score).collect(),
        mv_scores: iterations.iter().map(|it| it.mv.test_score).collect(),
        cv_choices: iterations.iter().map(|it| it.cv.choice).collect(),
        mv_choices: iterations.iter().map(|it| it.mv.choice).collect(),
        diff,
        diff_iterations,
        failed_iterations,
        outer_plans: plans,
        iterations,
        final_cv_model,
        final_mv_model,
        resources: ResourceSummary {
            cv: StrategyResources::new(selection[0], evaluation[0], rm),
            mv: StrategyResources::new(selection[1], evaluation[1], rm),
        },
        config_hash: None,
    })
}
