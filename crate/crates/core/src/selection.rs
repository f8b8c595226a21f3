//! Scoring candidate models by mutation validation or k-fold
//! cross-validation, and picking the best one.
//!
//! MV trains `f` on the data `S` and `f_eta` on a copy `S_eta` whose labels
//! were partly swapped, then scores the candidate from three training
//! accuracies:
//!
//! ```text
//! m = (1 - 2 eta) T_S(f_eta) + T_S(f) - T_{S_eta}(f_eta) + eta
//! ```
//!
//! CV scores a candidate by its mean held-out accuracy over `k` folds.
//! Selection takes the argmax; ties go to the smallest capacity.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::{make_fold_plan, Dataset, FoldPlan, MutationPlan};
use crate::error::{Error, Result};
use crate::learners::{CandidateModel, FitTally};
use crate::seed::derive_seed;

const MUTATION_TAG: u64 = 0x6d75_7461;
const FOLD_TAG: u64 = 0x666f_6c64;
const FIT_TAG: u64 = 0x6669_7420;

pub const DEFAULT_ETA: f64 = 0.2;

/// The m-score.
pub fn m_score(acc_orig: f64, acc_mut_on_mut: f64, acc_mut_on_orig: f64, eta: f64) -> f64 {
    (1.0 - 2.0 * eta) * acc_mut_on_orig + acc_orig - acc_mut_on_mut + eta
}

/// The three training accuracies behind one m-score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvScoreRecord {
    /// Accuracy of `f` on `S`.
    pub acc_orig: f64,
    /// Accuracy of `f_eta` on `S_eta`.
    pub acc_mut_on_mut: f64,
    /// Accuracy of `f_eta` on `S`.
    pub acc_mut_on_orig: f64,
    pub eta: f64,
    pub m: f64,
}

impl MvScoreRecord {
    pub fn new(acc_orig: f64, acc_mut_on_mut: f64, acc_mut_on_orig: f64, eta: f64) -> Self {
        Self {
            acc_orig,
            acc_mut_on_mut,
            acc_mut_on_orig,
            eta,
            m: m_score(acc_orig, acc_mut_on_mut, acc_mut_on_orig, eta),
        }
    }

    /// `m` re-derived from the stored accuracies.
    pub fn recompute_m(&self) -> f64 {
        m_score(self.acc_orig, self.acc_mut_on_mut, self.acc_mut_on_orig, self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MvConfig {
    pub eta: f64,
    pub repeats: usize,
}

impl Default for MvConfig {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            repeats: 1,
        }
    }
}

impl MvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::param("eta", format!("{} is outside (0, 0.5)", self.eta)));
        }
        if self.repeats == 0 {
            return Err(Error::param("repeats", "must be at least 1"));
        }
        Ok(())
    }
}

/// Independent mutation draws for one selection round. Every candidate in the
/// round sees the same draws.
pub fn mutation_plans(n_samples: usize, config: &MvConfig, seed: u64) -> Result<Vec<MutationPlan>> {
    config.validate()?;
    (0..config.repeats)
        .map(|r| MutationPlan::draw(n_samples, config.eta, derive_seed(seed, &[MUTATION_TAG, r as u64])))
        .collect()
}

/// Seed of the fold plan a CV selection round with `seed` partitions on.
pub fn fold_plan_seed(seed: u64) -> u64 {
    derive_seed(seed, &[FOLD_TAG])
}

/// MV score against precomputed mutation draws; two fits per draw.
/// Accuracies are averaged over draws and `m` is computed from the averages.
pub fn mv_score_with_plans(
    candidate: &CandidateModel,
    dataset: &Dataset,
    plans: &[MutationPlan],
    seed: u64,
    tally: &mut FitTally,
) -> Result<MvScoreRecord> {
    dataset.ensure_trainable()?;
    let Some(first) = plans.first() else {
        return Err(Error::param("repeats", "no mutation draws"));
    };
    let eta = first.eta;
    let mut sums = [0.0; 3];
    for (r, plan) in plans.iter().enumerate() {
        let key = candidate.seed_key();
        let f = tally.fit(candidate, dataset, derive_seed(seed, &[FIT_TAG, key, r as u64, 0]))?;
        let mutated = dataset.with_labels(plan.apply(dataset.labels()))?;
        let f_eta = tally.fit(candidate, &mutated, derive_seed(seed, &[FIT_TAG, key, r as u64, 1]))?;
        sums[0] += f.accuracy(dataset)?;
        sums[1] += f_eta.accuracy(&mutated)?;
        sums[2] += f_eta.accuracy(dataset)?;
    }
    let k = plans.len() as f64;
    Ok(MvScoreRecord::new(sums[0] / k, sums[1] / k, sums[2] / k, eta))
}

/// MV score of one candidate: `2 * repeats` fits.
pub fn mv_score(
    candidate: &CandidateModel,
    dataset: &Dataset,
    eta: f64,
    repeats: usize,
    seed: u64,
    tally: &mut FitTally,
) -> Result<MvScoreRecord> {
    dataset.ensure_trainable()?;
    let plans = mutation_plans(dataset.n_samples(), &MvConfig { eta, repeats }, seed)?;
    mv_score_with_plans(candidate, dataset, &plans, seed, tally)
}

/// Mean held-out accuracy over the folds of `plan`: `k` fits.
pub fn cv_score(
    candidate: &CandidateModel,
    dataset: &Dataset,
    plan: &FoldPlan,
    seed: u64,
    tally: &mut FitTally,
) -> Result<f64> {
    if plan.n_samples() != dataset.n_samples() {
        return Err(Error::param(
            "fold_plan",
            format!("plan covers {} samples, dataset has {}", plan.n_samples(), dataset.n_samples()),
        ));
    }
    let mut total = 0.0;
    for fold in 0..plan.k {
        let train = dataset.subset(&plan.train_indices(fold));
        if train.ensure_trainable().is_err() {
            return Err(Error::SingleClassPartition { fold });
        }
        let test = dataset.subset(&plan.test_indices(fold));
        let model = tally.fit(candidate, &train, derive_seed(seed, &[FIT_TAG, candidate.seed_key(), fold as u64]))?;
        total += model.accuracy(&test)?;
    }
    Ok(total / plan.k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Cv,
    Mv,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Cv => "cv",
            StrategyKind::Mv => "mv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    Cv { k: usize, stratified: bool },
    Mv(MvConfig),
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::Cv { .. } => StrategyKind::Cv,
            Strategy::Mv(_) => StrategyKind::Mv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub candidate: CandidateModel,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub chosen: CandidateModel,
    pub chosen_score: f64,
    /// Every candidate's score, in canonical (algorithm, capacity) order.
    pub per_candidate_scores: Vec<CandidateScore>,
    pub strategy: StrategyKind,
    pub seed: u64,
}

fn canonical_order(a: &CandidateModel, b: &CandidateModel) -> Ordering {
    a.capacity
        .cmp(&b.capacity)
        .then(a.algorithm.cmp(&b.algorithm))
        .then(a.regularization.total_cmp(&b.regularization))
        .then(a.epochs.cmp(&b.epochs))
}

/// Scores every candidate with `strategy` and returns the argmax. Among equal
/// scores the smallest capacity wins. The result does not depend on the
/// order of `candidates`.
pub fn select_model(
    candidates: &[CandidateModel],
    dataset: &Dataset,
    strategy: &Strategy,
    seed: u64,
    tally: &mut FitTally,
) -> Result<SelectionOutcome> {
    if candidates.is_empty() {
        return Err(Error::param("candidates", "empty candidate list"));
    }
    for c in candidates {
        c.validate()?;
    }
    let mut ordered = candidates.to_vec();
    ordered.sort_by(canonical_order);

    let scores: Vec<f64> = match strategy {
        Strategy::Cv { k, stratified } => {
            let plan = make_fold_plan(dataset, *k, fold_plan_seed(seed), *stratified)?;
            ordered
                .iter()
                .map(|c| cv_score(c, dataset, &plan, seed, tally))
                .collect::<Result<_>>()?
        }
        Strategy::Mv(config) => {
            dataset.ensure_trainable()?;
            let plans = mutation_plans(dataset.n_samples(), config, seed)?;
            ordered
                .iter()
                .map(|c| mv_score_with_plans(c, dataset, &plans, seed, tally).map(|r| r.m))
                .collect::<Result<_>>()?
        }
    };

    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        // strict comparison keeps the earliest (smallest capacity) maximum
        if s > scores[best] {
            best = i;
        }
    }
    Ok(SelectionOutcome {
        chosen: ordered[best],
        chosen_score: scores[best],
        per_candidate_scores: ordered
            .iter()
            .zip(&scores)
            .map(|(&candidate, &score)| CandidateScore { candidate, score })
            .collect(),
        strategy: strategy.kind(),
        seed,
    })
}
