//! Decisions and scores from criterion values: threshold calibration on real
//! data only, ranking metrics, and a small supervised combiner.
//!
//! Label convention everywhere: `true` = generated (positive class).

pub mod combiner;
pub mod forest;
pub mod logistic;
pub mod metrics;
pub mod threshold;
pub mod tree;

pub use combiner::{moe_fit, moe_score, CombinerHyper, CombinerKind, FeatureCombiner};
pub use forest::RandomForest;
pub use logistic::LogisticModel;
pub use metrics::{accuracy, ap, auc, detection_metrics, DetectionMetrics};
pub use threshold::{calibrate_threshold, CalibrationThreshold, Direction, DEFAULT_K};
pub use tree::{DecisionTree, Node};

use crate::error::{check_dim, Error, Result};

/// Rows share one nonzero dimension, all finite, labels aligned, both classes present.
pub(crate) fn check_training_set(x: &[Vec<f64>], y: &[bool]) -> Result<usize> {
    check_dim(x.len(), y.len())?;
    let d = x.first().map(Vec::len).ok_or(Error::EmptyInput("features"))?;
    if d == 0 {
        return Err(Error::invalid("features", "need at least one column"));
    }
    for row in x {
        check_dim(d, row.len())?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature value".into()));
        }
    }
    if y.iter().all(|l| *l) || y.iter().all(|l| !*l) {
        return Err(Error::SingleClass("training labels"));
    }
    Ok(d)
}
