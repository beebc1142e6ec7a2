//! Monte-Carlo estimators on spherical neighborhoods.
//!
//! All estimators evaluate the oracle at every boundary point in parallel,
//! collect the results in sample order, and reduce with [`pairwise_sum`], so
//! a given seed yields bitwise-identical output on any thread count.
//!
//! [`pairwise_sum`]: crate::numeric::pairwise_sum

pub mod criterion;
pub mod error_analysis;
pub mod kappa;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::numeric::norm;
use crate::rng::substream;
use crate::sphere::{ball_center, ball_radius, check_alpha, sample_sphere};
use crate::surfaces::ScoreOracle;

pub use criterion::{
    claim1_lhs, criterion_c, criterion_on_set, estimate_bias_term, estimate_bias_term_with_se, BiasEstimate, CriterionConfig,
    CriterionReport,
};
pub use error_analysis::{error_analysis, kappa_runs, stats_from_runs, EstimatorStats, DEFAULT_COUNTS, DEFAULT_RUNS};
pub use kappa::{
    estimate_d, estimate_kappa, kappa_from_scores, kappa_volume_from_curvature, true_kappa_volume, KappaForm,
};

/// Clean-signal predictor `x̃ ↦ x̂₀`.
pub trait Denoiser: Sync {
    fn dim(&self) -> usize;
    fn predict_x0(&self, x_tilde: &[f64]) -> Vec<f64>;
}

/// Closure-backed denoiser.
pub struct FnDenoiser<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> FnDenoiser<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> Denoiser for FnDenoiser<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn predict_x0(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

/// Posterior-mean denoiser from a score of the perturbed law:
/// `x̂₀ = (x̃ + α·∇log p_α(x̃)) / √(1−α)`.
pub struct TweedieDenoiser<O> {
    oracle: O,
    alpha: f64,
}

impl<O: ScoreOracle> TweedieDenoiser<O> {
    /// Needs `0 < α < 1`.
    pub fn new(oracle: O, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")));
        }
        Ok(Self { oracle, alpha })
    }
}

impl<O: ScoreOracle> Denoiser for TweedieDenoiser<O> {
    fn dim(&self) -> usize {
        self.oracle.dim()
    }
    fn predict_x0(&self, x: &[f64]) -> Vec<f64> {
        tweedie(x, &self.oracle.score(x), self.alpha)
    }
}

pub(crate) fn tweedie(x: &[f64], score: &[f64], alpha: f64) -> Vec<f64> {
    let k = 1.0 / (1.0 - alpha).sqrt();
    x.iter().zip(score).map(|(xi, si)| (xi + alpha * si) * k).collect()
}

/// Boundary points `c + R·n̂ᵢ` of a sphere with their outward unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub center: Vec<f64>,
    pub radius: f64,
    pub normals: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
}

impl Boundary {
    pub fn from_directions(center: &[f64], radius: f64, dirs: &[Vec<f64>]) -> Self {
        let normals: Vec<Vec<f64>> = dirs
            .iter()
            .map(|u| {
                let n = norm(u);
                u.iter().map(|v| v / n).collect()
            })
            .collect();
        let points = normals
            .iter()
            .map(|n| center.iter().zip(n).map(|(c, v)| c + radius * v).collect())
            .collect();
        Self {
            center: center.to_vec(),
            radius,
            normals,
            points,
        }
    }

    /// `s` uniform boundary points drawn sequentially from `rng`.
    pub fn draw<R: Rng + ?Sized>(center: &[f64], radius: f64, s: usize, rng: &mut R) -> Result<Self> {
        check_boundary_args(center.len(), radius, s)?;
        let dirs = (0..s)
            .map(|_| sample_sphere(center.len(), rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_directions(center, radius, &dirs))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scores(&self, oracle: &impl ScoreOracle) -> Vec<Vec<f64>> {
        evaluate(oracle, &self.points)
    }
}

pub(crate) fn check_boundary_args(d: usize, radius: f64, s: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("center", "dimension must be ≥ 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", "must be finite and > 0"));
    }
    if s == 0 {
        return Err(Error::invalid("s", "must be ≥ 1"));
    }
    Ok(())
}

pub(crate) fn evaluate(oracle: &impl ScoreOracle, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points.par_iter().map(|x| oracle.score(x)).collect()
}

/// One set of spherical perturbations `x̃ᵢ = √(1−α)·x₀ + √α·uᵢ`, with
/// `uᵢ` drawn from substream `(seed, i)`. Reused across all decomposed
/// estimates of one report.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSet {
    pub x0: Vec<f64>,
    pub alpha: f64,
    pub us: Vec<Vec<f64>>,
    pub boundary: Boundary,
}

impl PerturbationSet {
    pub fn draw(x0: &[f64], alpha: f64, s: usize, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        let d = x0.len();
        check_boundary_args(d, 1.0, s)?;
        let us = (0..s)
            .map(|i| sample_sphere(d, &mut substream(seed, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_directions(x0, alpha, us))
    }

    pub fn from_directions(x0: &[f64], alpha: f64, us: Vec<Vec<f64>>) -> Self {
        let center = ball_center(x0, alpha);
        let boundary = Boundary::from_directions(&center, ball_radius(alpha, x0.len()), &us);
        Self {
            x0: x0.to_vec(),
            alpha,
            us,
            boundary,
        }
    }

    pub fn s(&self) -> usize {
        self.us.len()
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.boundary.points
    }

    pub fn radius(&self) -> f64 {
        self.boundary.radius
    }

    pub(crate) fn check_oracle_dim(&self, d: usize) -> Result<()> {
        check_dim(self.dim(), d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dot;

    #[test]
    fn perturbation_points_match_the_sampling_formula() {
        let x0 = vec![0.5, -1.0, 2.0];
        let set = PerturbationSet::draw(&x0, 0.3, 16, 9).unwrap();
        for (u, p) in set.us.iter().zip(set.points()) {
            for k in 0..3 {
                let want = 0.7f64.sqrt() * x0[k] + 0.3f64.sqrt() * u[k];
                assert!((p[k] - want).abs() < 1e-12);
            }
        }
        for n in &set.boundary.normals {
            assert!((dot(n, n) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn perturbation_sets_are_seed_deterministic() {
        let a = PerturbationSet::draw(&[1.0, 2.0], 0.5, 8, 3).unwrap();
        let b = PerturbationSet::draw(&[1.0, 2.0], 0.5, 8, 3).unwrap();
        let c = PerturbationSet::draw(&[1.0, 2.0], 0.5, 8, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tweedie_recovers_a_point_mass() {
        // x₀ ≡ m: p_α = N(√(1−α)m, α), so the posterior mean is exactly m.
        let m = [1.5, -0.5];
        let alpha: f64 = 0.4;
        let oracle = crate::surfaces::FnScore::new(2, move |x: &[f64]| {
            x.iter().zip(&m).map(|(xi, mi)| ((1.0 - alpha).sqrt() * mi - xi) / alpha).collect()
        });
        let den = TweedieDenoiser::new(oracle, alpha).unwrap();
        let p = den.predict_x0(&[3.0, 7.0]);
        assert!((p[0] - 1.5).abs() < 1e-12 && (p[1] + 0.5).abs() < 1e-12);
    }
}
