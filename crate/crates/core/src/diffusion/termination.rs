//! Where reverse trajectories end: Mahalanobis proximity to mixture means,
//! percentile bootstrap interval and one-sided binomial test.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ln_gamma, percentile};
use crate::rng::Stream;
use crate::surfaces::GaussianMixture;

pub const DEFAULT_THRESHOLD: f64 = 2.45;
pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationReport {
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
    pub null_p: f64,
    pub threshold: f64,
    pub n_traj: usize,
    pub n_near: usize,
    pub n_boot: usize,
}

/// `P(X ≥ k)` for `X ~ Binomial(n, p)`, summed in log space so deep tails keep full relative precision.
pub fn binomial_upper_tail(k: usize, n: usize, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_n1 = ln_gamma(n as f64 + 1.0);
    let logs: Vec<f64> = (k..=n)
        .map(|j| {
            ln_n1 - ln_gamma(j as f64 + 1.0) - ln_gamma((n - j) as f64 + 1.0)
                + j as f64 * p.ln()
                + (n - j) as f64 * (-p).ln_1p()
        })
        .collect();
    crate::surfaces::gmm::log_sum_exp(&logs).exp().min(1.0)
}

/// Whether `x` lies within Mahalanobis distance `threshold` of any component mean.
pub fn near_any_mean(gmm: &GaussianMixture, x: &[f64], threshold: f64) -> Result<bool> {
    Ok(gmm.nearest_component(x)?.1 <= threshold)
}

/// Share of `points` whose Mahalanobis-nearest component is each `k`.
pub fn mode_shares(gmm: &GaussianMixture, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("points"));
    }
    let mut counts = vec![0usize; gmm.n_components()];
    for p in points {
        counts[gmm.nearest_component(p)?.0] += 1;
    }
    Ok(counts.iter().map(|c| *c as f64 / points.len() as f64).collect())
}

/// Fraction of the box `[lo, hi]` covered by the union of the threshold ellipses (2-D, midpoint rule on a 1000² lattice).
pub fn geometric_null(gmm: &GaussianMixture, threshold: f64, lo: [f64; 2], hi: [f64; 2]) -> Result<f64> {
    crate::error::check_dim(2, gmm.dim())?;
    if (0..2).any(|a| !(hi[a] > lo[a])) {
        return Err(Error::invalid("box", "need hi > lo on both axes"));
    }
    const N: usize = 1000;
    let step = [(hi[0] - lo[0]) / N as f64, (hi[1] - lo[1]) / N as f64];
    let mut covered = 0usize;
    for i in 0..N {
        for j in 0..N {
            let x = [lo[0] + (i as f64 + 0.5) * step[0], lo[1] + (j as f64 + 0.5) * step[1]];
            if near_any_mean(gmm, &x, threshold)? {
                covered += 1;
            }
        }
    }
    Ok(covered as f64 / (N * N) as f64)
}

/// Proximity indicators, percentile bootstrap CI and binomial p-value against `null_p`.
///
/// The CI is clamped to contain the observed fraction.
pub fn termination_analysis(
    endpoints: &[Vec<f64>],
    gmm: &GaussianMixture,
    threshold: f64,
    n_boot: usize,
    null_p: f64,
    rng: &mut Stream,
) -> Result<TerminationReport> {
    if endpoints.is_empty() {
        return Err(Error::EmptyInput("trajectories"));
    }
    if !(threshold >= 0.0) {
        return Err(Error::invalid("threshold", "must be ≥ 0"));
    }
    if n_boot == 0 {
        return Err(Error::invalid("n_boot", "must be ≥ 1"));
    }
    if !(0.0..=1.0).contains(&null_p) {
        return Err(Error::invalid("null_p", "must lie in [0, 1]"));
    }
    let hits = endpoints
        .iter()
        .map(|x| near_any_mean(gmm, x, threshold))
        .collect::<Result<Vec<bool>>>()?;
    let n = hits.len();
    let n_near = hits.iter().filter(|h| **h).count();
    let fraction = n_near as f64 / n as f64;

    let mut boot: Vec<f64> = (0..n_boot)
        .map(|_| (0..n).filter(|_| hits[rng.random_range(0..n)]).count() as f64 / n as f64)
        .collect();
    boot.sort_by(f64::total_cmp);
    let tail = (1.0 - CI_LEVEL) / 2.0;
    let ci_low = percentile(&boot, tail).min(fraction);
    let ci_high = percentile(&boot, 1.0 - tail).max(fraction);

    Ok(TerminationReport {
        fraction,
        ci_low,
        ci_high,
        p_value: binomial_upper_tail(n_near, n, null_p),
        null_p,
        threshold,
        n_traj: n,
        n_near,
        n_boot,
    })
}
