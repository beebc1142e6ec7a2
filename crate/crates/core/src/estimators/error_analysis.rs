//! Repeated-run statistics of the `κ̂` estimator against the boundary sample count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kappa::{estimate_kappa, KappaForm};
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, mean, std_dev};
use crate::rng::substream;
use crate::surfaces::ScoreOracle;

/// Counts used by the convergence study.
pub const DEFAULT_COUNTS: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 256];
pub const DEFAULT_RUNS: usize = 100;

const ZERO_STD_TOL: f64 = 1e-12;

/// Per-count mean/std of `κ̂` and the log-log fit of std against count.
///
/// `loglog_slope` is NaN and `loglog_r2` is 0 when the fit is undefined:
/// fewer than two counts, or any std at rounding level
/// (`≤ 1e-12·max(1, |mean|)`), or non-finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub sample_counts: Vec<usize>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub loglog_slope: f64,
    pub loglog_r2: f64,
}

/// Raw `κ̂` values, `[count][run]`. Run `r` at count `s` draws its boundary from substream `(seed, r·2³² + s)`.
pub fn kappa_runs(
    oracle: &impl ScoreOracle,
    center: &[f64],
    radius: f64,
    sample_counts: &[usize],
    runs: usize,
    seed: u64,
    delta: f64,
) -> Result<Vec<Vec<f64>>> {
    if runs == 0 {
        return Err(Error::invalid("runs", "must be ≥ 1"));
    }
    if sample_counts.is_empty() || sample_counts.windows(2).any(|w| w[0] >= w[1]) || sample_counts[0] == 0 {
        return Err(Error::invalid("sample_counts", "must be nonempty, positive and strictly ascending"));
    }
    sample_counts
        .iter()
        .map(|&s| {
            (0..runs)
                .into_par_iter()
                .map(|r| {
                    let mut rng = substream(seed, ((r as u64) << 32) | s as u64);
                    estimate_kappa(oracle, center, radius, s, &mut rng, delta, KappaForm::Normalized)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Statistics of [`kappa_runs`]; needs at least two runs.
pub fn error_analysis(
    oracle: &impl ScoreOracle,
    center: &[f64],
    radius: f64,
    sample_counts: &[usize],
    runs: usize,
    seed: u64,
    delta: f64,
) -> Result<EstimatorStats> {
    if runs < 2 {
        return Err(Error::invalid("runs", "need at least 2 runs"));
    }
    let per_count = kappa_runs(oracle, center, radius, sample_counts, runs, seed, delta)?;
    Ok(stats_from_runs(sample_counts, &per_count))
}

/// Per-count mean/std and log-log fit of raw `[count][run]` values.
pub fn stats_from_runs(sample_counts: &[usize], per_count: &[Vec<f64>]) -> EstimatorStats {
    let means: Vec<f64> = per_count.iter().map(|v| mean(v)).collect();
    let stds: Vec<f64> = per_count.iter().map(|v| std_dev(v)).collect();
    let degenerate = sample_counts.len() < 2
        || stds
            .iter()
            .zip(&means)
            .any(|(s, m)| !s.is_finite() || *s <= ZERO_STD_TOL * m.abs().max(1.0));
    let (slope, r2) = if degenerate {
        (f64::NAN, 0.0)
    } else {
        let lx: Vec<f64> = sample_counts.iter().map(|s| (*s as f64).ln()).collect();
        let ly: Vec<f64> = stds.iter().map(|s| s.ln()).collect();
        let fit = linear_fit(&lx, &ly);
        (fit.slope, fit.r2)
    };
    EstimatorStats {
        sample_counts: sample_counts.to_vec(),
        means,
        stds,
        loglog_slope: slope,
        loglog_r2: r2,
    }
}
