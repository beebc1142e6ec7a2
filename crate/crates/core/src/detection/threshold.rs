//! Real-only threshold calibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_K: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Scores above the threshold are flagged.
    #[default]
    GreaterIsGenerated,
    /// Scores below the threshold are flagged.
    LessIsGenerated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationThreshold {
    pub mean: f64,
    pub std: f64,
    pub k: f64,
    pub direction: Direction,
    /// `mean + k·std` (greater) or `mean − k·std` (less).
    pub threshold: f64,
}

impl CalibrationThreshold {
    /// Strict comparison: a score equal to the threshold counts as real.
    pub fn is_generated(&self, score: f64) -> bool {
        match self.direction {
            Direction::GreaterIsGenerated => score > self.threshold,
            Direction::LessIsGenerated => score < self.threshold,
        }
    }
}

/// Mean and unbiased standard deviation of real-only criteria, composed into a threshold.
pub fn calibrate_threshold(real: &[f64], k: f64, direction: Direction) -> Result<CalibrationThreshold> {
    if real.len() < 2 {
        return Err(Error::invalid("real_criteria", "need at least 2 values"));
    }
    if real.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("real criterion value".into()));
    }
    if !k.is_finite() {
        return Err(Error::invalid("k", "must be finite"));
    }
    let mean = crate::numeric::mean(real);
    let std = crate::numeric::std_dev(real);
    let threshold = match direction {
        Direction::GreaterIsGenerated => mean + k * std,
        Direction::LessIsGenerated => mean - k * std,
    };
    Ok(CalibrationThreshold {
        mean,
        std,
        k,
        direction,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::metrics::accuracy;

    #[test]
    fn examples() {
        let c = calibrate_threshold(&[1.5; 4], 2.0, Direction::GreaterIsGenerated).unwrap();
        assert_eq!((c.std, c.threshold), (0.0, 1.5));
        let c = calibrate_threshold(&[0.0, 2.0], 1.0, Direction::GreaterIsGenerated).unwrap();
        assert_eq!(c.mean, 1.0);
        assert!((c.std - 2f64.sqrt()).abs() < 1e-15);
        assert!((c.threshold - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        let c = calibrate_threshold(&[0.0, 2.0, 7.0], 0.0, Direction::LessIsGenerated).unwrap();
        assert_eq!(c.threshold, 3.0);
        assert!(calibrate_threshold(&[1.0], 1.0, Direction::GreaterIsGenerated).is_err());
    }

    #[test]
    fn accuracy_is_one_minus_violation_rate() {
        let real = [0.3, -0.2, 1.1, 0.7, 0.0, 0.4];
        let scores = [0.1, 2.5, -1.0, 1.9, 0.6, 3.0, 0.2, 1.4];
        let labels = [false, true, false, true, false, true, true, false];
        for dir in [Direction::GreaterIsGenerated, Direction::LessIsGenerated] {
            for k in [0.0, 1.0, 2.0, 3.0] {
                let c = calibrate_threshold(&real, k, dir).unwrap();
                let violations = scores
                    .iter()
                    .zip(&labels)
                    .filter(|(s, l)| c.is_generated(**s) != **l)
                    .count();
                let acc = accuracy(&scores, &labels, &c).unwrap();
                assert_eq!(acc, 1.0 - violations as f64 / scores.len() as f64);
            }
        }
    }
}
