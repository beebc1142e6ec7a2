//! Ranking and decision metrics. Label `true` means generated (the positive class).

use serde::{Deserialize, Serialize};

use super::threshold::{CalibrationThreshold, Direction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub auc: f64,
    pub ap: f64,
    pub accuracy: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

fn check_lengths(scores: &[f64], labels: &[bool]) -> Result<()> {
    crate::error::check_dim(scores.len(), labels.len())?;
    if scores.is_empty() {
        return Err(Error::EmptyInput("scores"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("score is NaN".into()));
    }
    Ok(())
}

/// Midranks (1-based) with ties sharing the average rank.
fn midranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// `P(score⁺ > score⁻) + ½·P(score⁺ = score⁻)` via the Mann-Whitney rank sum.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("AUC needs both classes"));
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, l)| **l).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Mean of precision at each positive in the descending ranking.
///
/// Tied scores form one threshold: every positive in a tie group gets the precision at the group's end.
pub fn ap(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let n_pos = labels.iter().filter(|l| **l).count();
    if n_pos == 0 {
        return Err(Error::SingleClass("AP needs at least one positive"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut seen, mut total) = (0usize, 0usize, 0.0);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let group_pos = order[i..=j].iter().filter(|&&k| labels[k]).count();
        tp += group_pos;
        seen += j - i + 1;
        total += group_pos as f64 * tp as f64 / seen as f64;
        i = j + 1;
    }
    Ok(total / n_pos as f64)
}

/// Fraction of points whose decision under `threshold` matches the label.
pub fn accuracy(scores: &[f64], labels: &[bool], threshold: &CalibrationThreshold) -> Result<f64> {
    check_lengths(scores, labels)?;
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(s, l)| threshold.is_generated(**s) == **l)
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

/// AUC and AP rank in the threshold's direction: for [`Direction::LessIsGenerated`]
/// lower scores count as more generated.
pub fn detection_metrics(scores: &[f64], labels: &[bool], threshold: &CalibrationThreshold) -> Result<DetectionMetrics> {
    let n_pos = labels.iter().filter(|l| **l).count();
    let oriented: Vec<f64> = match threshold.direction {
        Direction::GreaterIsGenerated => scores.to_vec(),
        Direction::LessIsGenerated => scores.iter().map(|s| -s).collect(),
    };
    Ok(DetectionMetrics {
        auc: auc(&oriented, labels)?,
        ap: ap(&oriented, labels)?,
        accuracy: accuracy(scores, labels, threshold)?,
        n_pos,
        n_neg: labels.len() - n_pos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn th(t: f64, direction: Direction) -> CalibrationThreshold {
        CalibrationThreshold {
            mean: t,
            std: 0.0,
            k: 0.0,
            direction,
            threshold: t,
        }
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap(), 0.75);
        assert_eq!(auc(&[0.3; 5], &[true, false, true, false, false]).unwrap(), 0.5);
        assert!(matches!(auc(&[1.0, 2.0], &[true, true]), Err(Error::SingleClass(_))));
    }

    #[test]
    fn auc_matches_pair_enumeration() {
        let s = [0.5, 0.5, 0.1, 0.9, 0.5, 0.2, 0.9];
        let l = [true, false, false, true, true, false, false];
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if l[i] && !l[j] {
                    pairs += 1.0;
                    wins += if s[i] > s[j] { 1.0 } else if s[i] == s[j] { 0.5 } else { 0.0 };
                }
            }
        }
        assert!((auc(&s, &l).unwrap() - wins / pairs).abs() < 1e-15);
    }

    #[test]
    fn ap_examples() {
        assert_eq!(ap(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap(), 1.0);
        let v = ap(&[4.0, 3.0, 2.0, 1.0], &[true, false, true, false]).unwrap();
        assert!((v - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(ap(&[4.0, 3.0, 2.0, 1.0], &[false, false, false, true]).unwrap(), 0.25);
        assert!(ap(&[1.0], &[false]).is_err());
    }

    #[test]
    fn ranking_follows_the_threshold_direction() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let labels = [true, true, false, false];
        let less = detection_metrics(&scores, &labels, &th(0.5, Direction::LessIsGenerated)).unwrap();
        assert_eq!((less.auc, less.ap, less.accuracy), (1.0, 1.0, 1.0));
        let greater = detection_metrics(&scores, &labels, &th(0.5, Direction::GreaterIsGenerated)).unwrap();
        assert_eq!((greater.auc, greater.accuracy), (0.0, 0.0));
    }

    #[test]
    fn accuracy_examples() {
        let gt = Direction::GreaterIsGenerated;
        assert_eq!(accuracy(&[1.0, 2.0], &[true, true], &th(0.0, gt)).unwrap(), 1.0);
        assert_eq!(accuracy(&[0.0, 1.0], &[false, true], &th(0.5, gt)).unwrap(), 1.0);
        assert_eq!(accuracy(&[0.0, 1.0], &[false, true], &th(0.5, Direction::LessIsGenerated)).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn auc_invariant_under_increasing_maps(
            s in proptest::collection::vec(-3.0f64..3.0, 4..40),
            seed in any::<u64>(),
        ) {
            let labels: Vec<bool> = (0..s.len()).map(|i| (seed >> (i % 64)) & 1 == 1 || i == 0).collect();
            prop_assume!(labels.iter().any(|l| !l));
            let base = auc(&s, &labels).unwrap();
            let ex: Vec<f64> = s.iter().map(|v| v.exp()).collect();
            let af: Vec<f64> = s.iter().map(|v| 3.0 * v - 7.0).collect();
            prop_assert!((auc(&ex, &labels).unwrap() - base).abs() < 1e-12);
            prop_assert!((auc(&af, &labels).unwrap() - base).abs() < 1e-12);
        }
    }
}
