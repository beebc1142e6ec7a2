//! Bagged CART trees; each tree draws its bootstrap from its own substream.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::DecisionTree;
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[bool], n_trees: usize, max_depth: usize, seed: u64) -> Result<Self> {
        super::check_training_set(x, y)?;
        if n_trees == 0 {
            return Err(Error::invalid("n_trees", "must be ≥ 1"));
        }
        let n = x.len();
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = substream(seed, t as u64);
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                DecisionTree::fit_indices(x, y, &idx, max_depth)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { trees })
    }

    /// Mean leaf probability over trees, summed in tree order.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let p: Vec<f64> = self.trees.iter().map(|t| t.predict(x)).collect();
        crate::numeric::mean(&p)
    }
}
