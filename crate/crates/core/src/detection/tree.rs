//! CART classification tree with Gini impurity and exhaustive midpoint splits.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Fraction of generated samples reaching the leaf.
        prob: f64,
        n: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// `x[feature] ≤ threshold`.
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub dim: usize,
    pub max_depth: usize,
    pub root: Node,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best split over every feature and midpoint; the first candidate in
/// `(feature, threshold)` order wins ties. Zero gain is accepted so that
/// patterns like XOR, whose single splits are all uninformative, can still grow.
fn best_split(x: &[Vec<f64>], y: &[bool], idx: &[usize]) -> Option<BestSplit> {
    let n = idx.len();
    let pos_total = idx.iter().filter(|&&i| y[i]).count();
    let parent = gini(pos_total, n);
    let mut best: Option<BestSplit> = None;
    for f in 0..x[idx[0]].len() {
        let mut sorted = idx.to_vec();
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut pos_left = 0;
        for k in 0..n - 1 {
            if y[sorted[k]] {
                pos_left += 1;
            }
            let (lo, hi) = (x[sorted[k]][f], x[sorted[k + 1]][f]);
            if lo == hi {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            let child = (nl as f64 * gini(pos_left, nl) + nr as f64 * gini(pos_total - pos_left, nr)) / n as f64;
            let gain = parent - child;
            if best.as_ref().is_none_or(|b| gain > b.gain + 1e-15) {
                best = Some(BestSplit {
                    feature: f,
                    threshold: 0.5 * (lo + hi),
                    gain,
                });
            }
        }
    }
    best
}

fn grow(x: &[Vec<f64>], y: &[bool], idx: &[usize], depth: usize, max_depth: usize) -> Node {
    let pos = idx.iter().filter(|&&i| y[i]).count();
    let leaf = Node::Leaf {
        prob: pos as f64 / idx.len() as f64,
        n: idx.len(),
    };
    if depth >= max_depth || pos == 0 || pos == idx.len() || idx.len() < 2 {
        return leaf;
    }
    let Some(split) = best_split(x, y, idx) else {
        return leaf;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][split.feature] <= split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(x, y, &l, depth + 1, max_depth)),
        right: Box::new(grow(x, y, &r, depth + 1, max_depth)),
    }
}

impl DecisionTree {
    pub fn fit(x: &[Vec<f64>], y: &[bool], max_depth: usize) -> Result<Self> {
        let idx: Vec<usize> = (0..x.len()).collect();
        Self::fit_indices(x, y, &idx, max_depth)
    }

    /// Fits on the multiset `idx` of rows (repeats allowed, as in a bootstrap draw).
    pub fn fit_indices(x: &[Vec<f64>], y: &[bool], idx: &[usize], max_depth: usize) -> Result<Self> {
        let dim = super::check_training_set(x, y)?;
        if idx.is_empty() {
            return Err(crate::error::Error::EmptyInput("tree sample"));
        }
        Ok(Self {
            dim,
            max_depth,
            root: grow(x, y, idx, 0, max_depth),
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { prob, .. } => return *prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }
}
