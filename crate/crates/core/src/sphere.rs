//! Uniform sampling on the radius-√d sphere, spherical perturbations, and
//! thin-shell statistics of Gaussian norms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, ln_gamma, mean, norm, variance};
use crate::rng::normal_vec;

/// Default perturbation strength `α·√d`.
pub const DEFAULT_STRENGTH: f64 = 1.28;

const NORM_TOL: f64 = 1e-9;

/// Uniform draw from the sphere of radius `√d`: a normal vector rescaled.
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::invalid("d", "must be ≥ 1"));
    }
    let target = (d as f64).sqrt();
    loop {
        let z = normal_vec(rng, d);
        let n = norm(&z);
        if n > 0.0 && n.is_finite() {
            return Ok(z.iter().map(|v| v / n * target).collect());
        }
    }
}

/// A perturbed point `x̃ = √(1−α)·x₀ + √α·u` together with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalSample {
    pub u: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub alpha: f64,
    pub x0: Vec<f64>,
}

impl SphericalSample {
    /// Ball center `√(1−α)·x₀`.
    pub fn center(&self) -> Vec<f64> {
        ball_center(&self.x0, self.alpha)
    }

    /// Ball radius `√(α·d)`.
    pub fn radius(&self) -> f64 {
        ball_radius(self.alpha, self.x0.len())
    }
}

pub fn ball_center(x0: &[f64], alpha: f64) -> Vec<f64> {
    let s = (1.0 - alpha).sqrt();
    x0.iter().map(|v| s * v).collect()
}

pub fn ball_radius(alpha: f64, d: usize) -> f64 {
    (alpha * d as f64).sqrt()
}

/// `α` giving perturbation strength `α·√d`.
pub fn alpha_for_strength(strength: f64, d: usize) -> Result<f64> {
    let a = strength / (d as f64).sqrt();
    check_alpha(a)?;
    Ok(a)
}

/// `α` whose ball radius `√(α·d)` equals `radius`.
pub fn alpha_for_radius(radius: f64, d: usize) -> Result<f64> {
    let a = radius * radius / d as f64;
    check_alpha(a)?;
    Ok(a)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1]")));
    }
    Ok(())
}

pub fn perturb(x0: &[f64], alpha: f64, u: &[f64]) -> Result<SphericalSample> {
    check_alpha(alpha)?;
    let d = x0.len();
    crate::error::check_dim(d, u.len())?;
    let target = (d as f64).sqrt();
    let nu = norm(u);
    if (nu - target).abs() > NORM_TOL * target.max(1.0) {
        return Err(Error::invalid("u", format!("norm {nu} differs from √d = {target}")));
    }
    let (a, b) = ((1.0 - alpha).sqrt(), alpha.sqrt());
    let x_tilde = x0.iter().zip(u).map(|(x, v)| a * x + b * v).collect();
    Ok(SphericalSample {
        u: u.to_vec(),
        x_tilde,
        alpha,
        x0: x0.to_vec(),
    })
}

/// Empirical moments of `‖ε‖` for `ε ~ N(0, I_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellStats {
    pub d: usize,
    pub n: usize,
    pub mean_norm: f64,
    pub var_norm: f64,
}

impl ShellStats {
    /// Mean of `‖ε‖/√d`.
    pub fn mean_ratio(&self) -> f64 {
        self.mean_norm / (self.d as f64).sqrt()
    }

    /// Variance of `‖ε‖/√d`.
    pub fn var_ratio(&self) -> f64 {
        self.var_norm / self.d as f64
    }
}

pub fn shell_stats<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<ShellStats> {
    if n < 2 {
        return Err(Error::invalid("n", "need at least 2 draws"));
    }
    if d == 0 {
        return Err(Error::invalid("d", "must be ≥ 1"));
    }
    let norms: Vec<f64> = (0..n).map(|_| norm(&normal_vec(rng, d))).collect();
    Ok(ShellStats {
        d,
        n,
        mean_norm: mean(&norms),
        var_norm: variance(&norms).max(0.0),
    })
}

/// Fraction of draws with `‖ε‖/√d ∈ [lo, hi]`.
pub fn shell_coverage<R: Rng + ?Sized>(d: usize, n: usize, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let s = (d as f64).sqrt();
    let hits = (0..n)
        .filter(|_| {
            let r = norm(&normal_vec(rng, d)) / s;
            (lo..=hi).contains(&r)
        })
        .count();
    hits as f64 / n as f64
}

/// Exact `E‖ε‖ = √2·Γ((d+1)/2)/Γ(d/2)`.
pub fn chi_mean(d: usize) -> f64 {
    let k = d as f64;
    2f64.sqrt() * (ln_gamma((k + 1.0) / 2.0) - ln_gamma(k / 2.0)).exp()
}

/// Exact `Var‖ε‖ = d − (E‖ε‖)²`.
pub fn chi_variance(d: usize) -> f64 {
    let m = chi_mean(d);
    d as f64 - m * m
}

/// Mean of `u/‖u‖` over a sample, the Monte-Carlo image of `∮ n dS = 0`.
pub fn mean_unit_normal(us: &[Vec<f64>]) -> Vec<f64> {
    let units: Vec<Vec<f64>> = us
        .iter()
        .map(|u| {
            let n = dot(u, u).sqrt();
            u.iter().map(|v| v / n).collect()
        })
        .collect();
    crate::numeric::mean_vec(&units)
}
