//! Ridge-shaped toy log-densities and their "bumpy" perturbations.
//!
//! Bump parametrization: each bump is an isotropic Gaussian of width
//! `bump_width` whose peak height is `bump_scale` times the base density at
//! its center. Bumps are added to the unit-mass base density, the sum is
//! renormalized to unit mass, and the log is returned. Centers are drawn from
//! cells whose density is at least [`HIGH_DENSITY_FRACTION`] of the maximum,
//! with probability proportional to density.

use rand::Rng;

use super::grid::ScalarFieldGrid;
use crate::error::{Error, Result};
use crate::rng::stream;

pub const HIGH_DENSITY_FRACTION: f64 = 0.1;

/// Log-density of points spread uniformly along the curve
/// `y = amplitude·sin(frequency·x)`, `x ∈ [−half_length, half_length]`,
/// blurred by an isotropic Gaussian of standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeSpec {
    pub amplitude: f64,
    pub frequency: f64,
    pub half_length: f64,
    pub sigma: f64,
    pub curve_points: usize,
}

impl Default for RidgeSpec {
    fn default() -> Self {
        Self {
            amplitude: 0.8,
            frequency: 1.2,
            half_length: 2.0,
            sigma: 0.35,
            curve_points: 400,
        }
    }
}

/// Ridge log-density sampled on `[lo, hi]²`.
pub fn ridge_log_density(spec: &RidgeSpec, lo: f64, hi: f64, spacing: f64) -> Result<ScalarFieldGrid> {
    if !(spec.sigma > 0.0) || spec.curve_points == 0 {
        return Err(Error::invalid("ridge", "sigma must be > 0 and curve_points ≥ 1"));
    }
    let m = spec.curve_points;
    let pts: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let t = if m == 1 { 0.0 } else { k as f64 / (m - 1) as f64 };
            let x = -spec.half_length + 2.0 * spec.half_length * t;
            (x, spec.amplitude * (spec.frequency * x).sin())
        })
        .collect();
    let s2 = spec.sigma * spec.sigma;
    let log_norm = -(2.0 * std::f64::consts::PI * s2).ln() - (m as f64).ln();
    ScalarFieldGrid::square(lo, hi, spacing, |x, y| {
        let logs: Vec<f64> = pts
            .iter()
            .map(|(px, py)| -((x - px).powi(2) + (y - py).powi(2)) / (2.0 * s2))
            .collect();
        super::gmm::log_sum_exp(&logs) + log_norm
    })
}

/// A bumpy surface together with the planted bump centers.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedBumps {
    pub grid: ScalarFieldGrid,
    pub centers: Vec<[f64; 2]>,
}

pub fn plant_bumps(
    base: &ScalarFieldGrid,
    bump_count: usize,
    bump_scale: f64,
    bump_width: f64,
    seed: u64,
) -> Result<PlantedBumps> {
    if base.dim() != 2 {
        return Err(Error::invalid("base", "bumpy surfaces need a 2-D grid"));
    }
    if !(bump_scale > 0.0) || !(bump_width > 0.0) {
        return Err(Error::invalid("bump_scale/bump_width", "must be > 0"));
    }
    if bump_count == 0 {
        return Ok(PlantedBumps {
            grid: base.clone(),
            centers: Vec::new(),
        });
    }
    let top = base.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cell = base.cell_volume();
    let raw: Vec<f64> = base.values().iter().map(|v| (v - top).exp()).collect();
    let mass = crate::numeric::pairwise_sum(&raw) * cell;
    let density: Vec<f64> = raw.iter().map(|v| v / mass).collect();
    let dmax = density.iter().copied().fold(0.0, f64::max);

    let candidates: Vec<usize> = (0..density.len())
        .filter(|&i| density[i] >= HIGH_DENSITY_FRACTION * dmax && density[i] > 0.0)
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptyInput("no high-density cells for bump placement"));
    }
    let mut cumulative = Vec::with_capacity(candidates.len());
    let mut acc = 0.0;
    for &i in &candidates {
        acc += density[i];
        cumulative.push(acc);
    }

    let mut rng = stream(seed);
    let mut centers = Vec::with_capacity(bump_count);
    let mut heights = Vec::with_capacity(bump_count);
    for _ in 0..bump_count {
        let u: f64 = rng.random::<f64>() * acc;
        let pos = cumulative.partition_point(|c| *c <= u).min(candidates.len() - 1);
        let idx = candidates[pos];
        let c = base.coords(idx);
        centers.push([c[0], c[1]]);
        heights.push(bump_scale * density[idx]);
    }

    let w2 = 2.0 * bump_width * bump_width;
    let bumped: Vec<f64> = (0..density.len())
        .map(|idx| {
            let p = base.coords(idx);
            let extra: f64 = centers
                .iter()
                .zip(&heights)
                .map(|(c, h)| h * (-((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / w2).exp())
                .sum();
            density[idx] + extra
        })
        .collect();
    let new_mass = crate::numeric::pairwise_sum(&bumped) * cell;
    let grid = base.with_values(bumped.iter().map(|v| (v / new_mass).ln()).collect())?;
    Ok(PlantedBumps { grid, centers })
}

/// Base log-density plus `bump_count` Gaussian bumps, renormalized.
pub fn bumpy_surface(
    base: &ScalarFieldGrid,
    bump_count: usize,
    bump_scale: f64,
    bump_width: f64,
    seed: u64,
) -> Result<ScalarFieldGrid> {
    plant_bumps(base, bump_count, bump_scale, bump_width, seed).map(|p| p.grid)
}
