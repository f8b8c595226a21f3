use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Per-feature one-way ANOVA F statistics and the induced ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScoreTable {
    pub f_scores: Vec<f64>,
    /// Feature indices by descending score; ties go to the lower index.
    pub ranking: Vec<usize>,
}

impl FeatureScoreTable {
    pub fn from_scores(f_scores: Vec<f64>) -> Self {
        let mut ranking: Vec<usize> = (0..f_scores.len()).collect();
        // stable sort keeps lower indices first among equal scores
        ranking.sort_by(|&a, &b| f_scores[b].total_cmp(&f_scores[a]));
        Self { f_scores, ranking }
    }
}

/// One-way ANOVA F for a binary label: between-group mean square over
/// within-group mean square, with (1, n - 2) degrees of freedom.
///
/// Constant features score 0. Features with zero within-group variance but a
/// nonzero between-group difference get the largest finite score in the table
/// plus one, so the table stays finite and totally ordered.
pub fn anova_f_scores(dataset: &Dataset) -> Result<FeatureScoreTable> {
    dataset.ensure_trainable()?;
    let x = dataset.features();
    let labels = dataset.labels();
    let n = dataset.n_samples();
    let dof_within = n.saturating_sub(2) as f64;

    let mut raw: Vec<Option<f64>> = Vec::with_capacity(dataset.n_features());
    let mut groups: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for col in 0..dataset.n_features() {
        groups[0].clear();
        groups[1].clear();
        for (i, &label) in labels.iter().enumerate() {
            groups[label as usize].push(x[(i, col)]);
        }
        // summing in sorted order makes the score independent of sample order
        groups[0].sort_by(f64::total_cmp);
        groups[1].sort_by(f64::total_cmp);
        let mut all: Vec<f64> = groups[0].iter().chain(&groups[1]).copied().collect();
        all.sort_by(f64::total_cmp);
        let grand = all.iter().sum::<f64>() / n as f64;

        let mut between = 0.0;
        let mut within = 0.0;
        for g in &groups {
            let mean = g.iter().sum::<f64>() / g.len() as f64;
            between += g.len() as f64 * (mean - grand).powi(2);
            within += g.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        }
        raw.push(if between == 0.0 {
            Some(0.0)
        } else if within == 0.0 || dof_within == 0.0 {
            None
        } else {
            Some(between / (within / dof_within))
        });
    }

    let max_finite = raw.iter().flatten().copied().fold(0.0, f64::max);
    let f_scores = raw
        .into_iter()
        .map(|s| s.unwrap_or(max_finite + 1.0))
        .collect();
    Ok(FeatureScoreTable::from_scores(f_scores))
}

/// Keeps the `k` top-ranked columns, in their original order.
pub fn select_k_best(dataset: &Dataset, table: &FeatureScoreTable, k: usize) -> Result<Dataset> {
    let p = dataset.n_features();
    if table.f_scores.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: table.f_scores.len(),
        });
    }
    if k == 0 || k > p {
        return Err(Error::param("K", format!("{k} is outside [1, {p}]")));
    }
    let mut keep = table.ranking[..k].to_vec();
    keep.sort_unstable();
    Ok(dataset.select_columns(&keep))
}
