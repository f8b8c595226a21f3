//! Binary CART tree grown greedily on Gini impurity.
//!
//! Thresholds are midpoints between consecutive distinct feature values.
//! Split quality is compared exactly in integer arithmetic, so ties resolve
//! deterministically to the lowest feature index and then the lowest
//! threshold.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum Node {
    Leaf { class: u8 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Sum of squared class counts over the node size, as an exact fraction.
#[derive(Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of(left: [u64; 2], right: [u64; 2]) -> Self {
        let nl = (left[0] + left[1]) as u128;
        let nr = (right[0] + right[1]) as u128;
        let sl = (left[0] as u128).pow(2) + (left[1] as u128).pow(2);
        let sr = (right[0] as u128).pow(2) + (right[1] as u128).pow(2);
        // sl / nl + sr / nr; larger means lower weighted Gini impurity
        Purity {
            num: sl * nr + sr * nl,
            den: nl * nr,
        }
    }

    fn beats(self, other: Purity) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct Builder<'a> {
    x: &'a DMatrix<f64>,
    y: &'a [u8],
    max_depth: usize,
    nodes: Vec<Node>,
}

fn majority(counts: [u64; 2]) -> u8 {
    u8::from(counts[1] > counts[0])
}

impl Builder<'_> {
    fn grow(&mut self, samples: &[usize], depth: usize) -> usize {
        let mut counts = [0u64; 2];
        for &i in samples {
            counts[self.y[i] as usize] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: majority(counts),
        });
        if depth >= self.max_depth || samples.len() < 2 || counts[0] == 0 || counts[1] == 0 {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(samples, counts) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&i| self.x[(i, feature)] <= threshold);
        let left = self.grow(&left, depth + 1);
        let right = self.grow(&right, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, samples: &[usize], totals: [u64; 2]) -> Option<(usize, f64)> {
        let mut best: Option<(Purity, usize, f64)> = None;
        let mut column: Vec<(f64, u8)> = Vec::with_capacity(samples.len());
        for feature in 0..self.x.ncols() {
            column.clear();
            column.extend(samples.iter().map(|&i| (self.x[(i, feature)], self.y[i])));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0u64; 2];
            for w in 0..column.len() - 1 {
                left[column[w].1 as usize] += 1;
                let (lo, hi) = (column[w].0, column[w + 1].0);
                if lo == hi {
                    continue;
                }
                let right = [totals[0] - left[0], totals[1] - left[1]];
                let purity = Purity::of(left, right);
                if best.is_none_or(|(b, _, _)| purity.beats(b)) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((purity, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl DecisionTree {
    pub fn fit(x: &DMatrix<f64>, y: &[u8], max_depth: usize) -> Self {
        let mut builder = Builder {
            x,
            y,
            max_depth,
            nodes: Vec::new(),
        };
        let all: Vec<usize> = (0..y.len()).collect();
        builder.grow(&all, 0);
        DecisionTree {
            nodes: builder.nodes,
        }
    }

    pub fn predict_row(&self, x: &DMatrix<f64>, row: usize) -> u8 {
        let mut node = 0;
        loop {
            match self.nodes[node] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[(row, feature)] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}
