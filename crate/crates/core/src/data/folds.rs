use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Assignment of every sample to one of `k` folds of near-equal size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub seed: u64,
    pub stratified: bool,
}

impl FoldPlan {
    pub fn n_samples(&self) -> usize {
        self.assignment.len()
    }

    /// Indices held out in `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    /// Indices used for training when `fold` is held out, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Random k-fold split. Samples are shuffled and dealt round-robin, so fold
/// sizes differ by at most one. With `stratified`, each class is shuffled and
/// dealt separately (continuing the same round-robin counter), which also
/// balances per-class counts to within one.
pub fn make_fold_plan(dataset: &Dataset, k: usize, seed: u64, stratified: bool) -> Result<FoldPlan> {
    let n = dataset.n_samples();
    if k < 2 {
        return Err(Error::param("k", format!("{k} folds; need at least 2")));
    }
    if k > n {
        return Err(Error::TooManyFolds { k, n });
    }
    let mut rng = rng_from_seed(seed);
    let mut assignment = vec![0; n];
    if stratified {
        let counts = dataset.class_counts();
        for class in 0..2u8 {
            if counts[class as usize] < k {
                return Err(Error::StratificationInfeasible {
                    class,
                    count: counts[class as usize],
                    k,
                });
            }
        }
        let mut dealt = 0;
        for class in 0..2u8 {
            let mut members: Vec<usize> = (0..n)
                .filter(|&i| dataset.labels()[i] == class)
                .collect();
            members.shuffle(&mut rng);
            for i in members {
                assignment[i] = dealt % k;
                dealt += 1;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for (pos, i) in order.into_iter().enumerate() {
            assignment[i] = pos % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignment,
        seed,
        stratified,
    })
}
