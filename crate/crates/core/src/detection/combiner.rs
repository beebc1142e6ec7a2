//! Few-shot combiner of a zero-shot criterion and auxiliary scores.

use serde::{Deserialize, Serialize};

use super::forest::RandomForest;
use super::logistic::LogisticModel;
use super::tree::DecisionTree;
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CombinerKind {
    Logistic,
    Tree,
    #[default]
    Forest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerHyper {
    pub max_depth: usize,
    pub n_trees: usize,
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for CombinerHyper {
    fn default() -> Self {
        Self {
            max_depth: 4,
            n_trees: 100,
            iterations: 500,
            learning_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureCombiner {
    Logistic(LogisticModel),
    Tree(DecisionTree),
    Forest(RandomForest),
}

impl FeatureCombiner {
    pub fn kind(&self) -> CombinerKind {
        match self {
            Self::Logistic(_) => CombinerKind::Logistic,
            Self::Tree(_) => CombinerKind::Tree,
            Self::Forest(_) => CombinerKind::Forest,
        }
    }

    /// Feature dimension; `None` for a forest with no trees.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Logistic(m) => Some(m.dim()),
            Self::Tree(t) => Some(t.dim),
            Self::Forest(f) => f.trees.first().map(|t| t.dim),
        }
    }
}

/// Needs at least two samples of each class.
pub fn moe_fit(
    features: &[Vec<f64>],
    labels: &[bool],
    kind: CombinerKind,
    hyper: &CombinerHyper,
    seed: u64,
) -> Result<FeatureCombiner> {
    super::check_training_set(features, labels)?;
    let pos = labels.iter().filter(|l| **l).count();
    if pos < 2 || labels.len() - pos < 2 {
        return Err(Error::SingleClass("combiner needs at least 2 samples per class"));
    }
    Ok(match kind {
        CombinerKind::Logistic => {
            FeatureCombiner::Logistic(LogisticModel::fit(features, labels, hyper.iterations, hyper.learning_rate)?)
        }
        CombinerKind::Tree => FeatureCombiner::Tree(DecisionTree::fit(features, labels, hyper.max_depth)?),
        CombinerKind::Forest => {
            FeatureCombiner::Forest(RandomForest::fit(features, labels, hyper.n_trees, hyper.max_depth, seed)?)
        }
    })
}

/// Generated-class likelihood per row.
pub fn moe_score(combiner: &FeatureCombiner, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = combiner
        .dim()
        .ok_or(Error::invalid("combiner", "not fitted (no trees)"))?;
    features
        .iter()
        .map(|x| {
            check_dim(d, x.len())?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("feature value".into()));
            }
            Ok(match combiner {
                FeatureCombiner::Logistic(m) => m.predict(x),
                FeatureCombiner::Tree(t) => t.predict(x),
                FeatureCombiner::Forest(f) => f.predict(x),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::metrics::auc;
    use crate::rng::{normal_vec, stream};

    fn separable() -> (Vec<Vec<f64>>, Vec<bool>) {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let y = (0..30).map(|i| i >= 15).collect();
        (x, y)
    }

    #[test]
    fn separable_scores_are_ordered_for_every_kind() {
        let (x, y) = separable();
        for kind in [CombinerKind::Logistic, CombinerKind::Tree, CombinerKind::Forest] {
            let c = moe_fit(&x, &y, kind, &CombinerHyper::default(), 1).unwrap();
            let s = moe_score(&c, &x).unwrap();
            let max_neg = s.iter().zip(&y).filter(|(_, l)| !**l).map(|(v, _)| *v).fold(f64::MIN, f64::max);
            let min_pos = s.iter().zip(&y).filter(|(_, l)| **l).map(|(v, _)| *v).fold(f64::MAX, f64::min);
            assert!(min_pos > max_neg, "{kind:?}");
        }
    }

    #[test]
    fn constant_input_gives_constant_scores() {
        let (x, y) = separable();
        let c = moe_fit(&x, &y, CombinerKind::Forest, &CombinerHyper::default(), 2).unwrap();
        let s = moe_score(&c, &vec![vec![7.0, 1.0]; 5]).unwrap();
        assert!(s.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let x = vec![vec![0.0, 0.0]; 4];
        assert!(moe_fit(&x, &[true, true, true, false], CombinerKind::Tree, &CombinerHyper::default(), 0).is_err());
        let empty = FeatureCombiner::Forest(RandomForest { trees: vec![] });
        assert!(moe_score(&empty, &[vec![0.0, 0.0]]).is_err());
        let (x, y) = separable();
        let c = moe_fit(&x, &y, CombinerKind::Logistic, &CombinerHyper::default(), 0).unwrap();
        assert!(moe_score(&c, &[vec![0.0]]).is_err());
    }

    #[test]
    fn complementary_features_do_not_hurt() {
        // Each feature carries the label shift with independent noise.
        let make = |seed| {
            let mut rng = stream(seed);
            let mut x = Vec::new();
            let mut y = Vec::new();
            for i in 0..600 {
                let label = i % 2 == 0;
                let n = normal_vec(&mut rng, 2);
                let shift = if label { 1.2 } else { 0.0 };
                x.push(vec![n[0] + shift, n[1] + shift]);
                y.push(label);
            }
            (x, y)
        };
        let (xt, yt) = make(10);
        let (xh, yh) = make(11);
        let c = moe_fit(&xt, &yt, CombinerKind::Forest, &CombinerHyper::default(), 3).unwrap();
        let moe = auc(&moe_score(&c, &xh).unwrap(), &yh).unwrap();
        let single = (0..2)
            .map(|k| auc(&xh.iter().map(|v| v[k]).collect::<Vec<_>>(), &yh).unwrap())
            .fold(0.0, f64::max);
        assert!(moe >= single - 0.02, "moe {moe} single {single}");
    }

    #[test]
    fn fit_is_seed_deterministic() {
        let (x, y) = separable();
        let h = CombinerHyper::default();
        assert_eq!(
            moe_fit(&x, &y, CombinerKind::Forest, &h, 9).unwrap(),
            moe_fit(&x, &y, CombinerKind::Forest, &h, 9).unwrap()
        );
    }
}
