//! Linear noise schedule and the forward (noising) process.
//!
//! Notation bridge: the standard DDPM form is
//! `x_t = √ᾱ_t·x₀ + √(1−ᾱ_t)·ε`. The ball-perturbation form
//! `x̃ = √(1−α)·x₀ + √α·ε` uses `α_t = 1 − ᾱ_t`. [`NoiseSchedule::alpha_bar`]
//! returns the former, [`NoiseSchedule::perturbation_alpha`] the latter.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::normal_vec;

pub const DEFAULT_STEPS: usize = 100;
pub const DEFAULT_BETA_START: f64 = 1e-4;
pub const DEFAULT_BETA_END: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub betas: Vec<f64>,
    pub alphas_bar: Vec<f64>,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        make_schedule(DEFAULT_STEPS, DEFAULT_BETA_START, DEFAULT_BETA_END).expect("default schedule is valid")
    }
}

/// Betas linearly spaced from `beta_start` to `beta_end` inclusive; `ᾱ_t = Π_{s≤t}(1−β_s)`.
pub fn make_schedule(steps: usize, beta_start: f64, beta_end: f64) -> Result<NoiseSchedule> {
    if steps == 0 {
        return Err(Error::invalid("T", "must be ≥ 1"));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::invalid(
            "beta",
            format!("need 0 < beta_start ≤ beta_end < 1, got {beta_start}, {beta_end}"),
        ));
    }
    let betas: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                beta_start
            } else {
                beta_start + (beta_end - beta_start) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let mut alphas_bar = Vec::with_capacity(steps);
    let mut acc = 1.0;
    for b in &betas {
        acc *= 1.0 - b;
        alphas_bar.push(acc);
    }
    Ok(NoiseSchedule {
        steps,
        beta_start,
        beta_end,
        betas,
        alphas_bar,
    })
}

impl NoiseSchedule {
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alphas_bar[t]
    }

    /// `α_t = 1 − ᾱ_t`, the scheduling scalar of the ball-perturbation form.
    pub fn perturbation_alpha(&self, t: usize) -> f64 {
        1.0 - self.alphas_bar[t]
    }

    /// Scalar time feature fed to the network.
    pub fn time_feature(&self, t: usize) -> f64 {
        t as f64 / self.steps as f64
    }

    /// Step whose `α_t` is closest to `alpha`.
    pub fn step_for_alpha(&self, alpha: f64) -> usize {
        (0..self.steps)
            .min_by(|&a, &b| {
                (self.perturbation_alpha(a) - alpha)
                    .abs()
                    .total_cmp(&(self.perturbation_alpha(b) - alpha).abs())
            })
            .unwrap_or(0)
    }

    pub(crate) fn check_step(&self, t: usize) -> Result<()> {
        if t >= self.steps {
            return Err(Error::invalid("t", format!("{t} outside 0..{}", self.steps)));
        }
        Ok(())
    }
}

/// `x_t = √ᾱ_t·x₀ + √(1−ᾱ_t)·ε` with the drawn `ε`.
pub fn forward_sample<R: Rng + ?Sized>(
    x0: &[f64],
    t: usize,
    schedule: &NoiseSchedule,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    schedule.check_step(t)?;
    let eps = normal_vec(rng, x0.len());
    Ok((forward_with_noise(x0, &eps, schedule.alpha_bar(t)), eps))
}

pub fn forward_with_noise(x0: &[f64], eps: &[f64], alpha_bar: f64) -> Vec<f64> {
    let (a, b) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    x0.iter().zip(eps).map(|(x, e)| a * x + b * e).collect()
}
