//! The combined criterion and the denoiser bias term.
//!
//! For a perturbation set `x̃ᵢ = √(1−α)·x₀ + √α·uᵢ` and score oracle `h`,
//!
//! `c_raw = (1/s)·Σ⟨−hᵢ/(‖hᵢ‖+δ), a·uᵢ − b·hᵢ + c·√d·x₀⟩`,
//!
//! `c_scaled = c_raw / ((a+b+c)·√d) + 1`, or `1` when `a+b+c = 0`.
//!
//! The `u`-term contributes `O(√d)` in raw coordinates, hence the extra `√d`
//! in the scaling. With `h` the score, `−⟨ĥ, u⟩ = √α·κ̂` and `⟨ĥ, h⟩ = D̂`
//! (at `δ = 0`), so `c_raw = a·√α·κ̂ + b·D̂ − c·√d·mean⟨ĥᵢ, x₀⟩`. A negative
//! `b` gives the `κ − D` orientation of the stable-maximum argument.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kappa::{kappa_from_scores, mean_norm, KappaForm};
use super::{evaluate, tweedie, Denoiser, PerturbationSet};
use crate::error::{check_dim, Error, Result};
use crate::numeric::{dot, mean, norm, std_dev};
use crate::sphere::{alpha_for_strength, perturb, sample_sphere, DEFAULT_STRENGTH};
use crate::surfaces::ScoreOracle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionConfig {
    pub s: usize,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub seed: u64,
    pub normalize_by_ball: bool,
}

impl CriterionConfig {
    /// `s = 64`, `α·√d = 1.28` (capped at `α = 1`), `δ = 1e-8`, `a = b = c = 1`.
    pub fn defaults_for_dim(d: usize) -> Self {
        let alpha = alpha_for_strength(DEFAULT_STRENGTH, d).unwrap_or(1.0);
        Self {
            s: 64,
            alpha,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            delta: 1e-8,
            seed: 0,
            normalize_by_ball: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::invalid("s", "must be ≥ 1"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta", "must be finite and > 0"));
        }
        crate::sphere::check_alpha(self.alpha)?;
        if ![self.a, self.b, self.c].iter().all(|w| w.is_finite()) {
            return Err(Error::invalid("a/b/c", "weights must be finite"));
        }
        Ok(())
    }

    pub fn weight_sum(&self) -> f64 {
        self.a + self.b + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub kappa_hat: f64,
    pub d_hat: f64,
    pub bias_hat: f64,
    pub c_raw: f64,
    pub c_scaled: f64,
    pub s: usize,
    pub radius: f64,
    pub alpha: f64,
    pub seed: u64,
}

/// `c_raw / ((a+b+c)·√d) + 1`, or 1 for zero total weight.
pub fn scale_criterion(c_raw: f64, weight_sum: f64, d: usize) -> f64 {
    if weight_sum == 0.0 {
        1.0
    } else {
        c_raw / (weight_sum * (d as f64).sqrt()) + 1.0
    }
}

pub fn criterion_c(h: &impl ScoreOracle, x0: &[f64], config: &CriterionConfig) -> Result<CriterionReport> {
    config.validate()?;
    let set = PerturbationSet::draw(x0, config.alpha, config.s, config.seed)?;
    criterion_on_set(h, &set, config)
}

/// Criterion and its decomposition on a caller-supplied perturbation set.
pub fn criterion_on_set(h: &impl ScoreOracle, set: &PerturbationSet, config: &CriterionConfig) -> Result<CriterionReport> {
    set.check_oracle_dim(h.dim())?;
    let scores = evaluate(h, set.points());
    if scores.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("oracle returned a non-finite score".into()));
    }
    let d = set.dim();
    let sqrt_d = (d as f64).sqrt();
    let terms: Vec<f64> = scores
        .iter()
        .zip(&set.us)
        .map(|(hv, u)| {
            let k = -1.0 / (norm(hv) + config.delta);
            (0..d)
                .map(|j| k * hv[j] * (config.a * u[j] - config.b * hv[j] + config.c * sqrt_d * set.x0[j]))
                .sum()
        })
        .collect();
    let c_raw = mean(&terms);
    let form = KappaForm::from_normalize_flag(config.normalize_by_ball);
    let kappa_hat = kappa_from_scores(&set.boundary, &scores, config.delta, form)?;
    let d_hat = mean_norm(&scores);
    let bias_hat = if set.alpha < 1.0 {
        let per: Vec<f64> = set
            .points()
            .iter()
            .zip(&scores)
            .map(|(x, hv)| bias_inner(&set.x0, &tweedie(x, hv, set.alpha)))
            .collect();
        mean(&per)
    } else {
        // x̂₀ is undefined once the source is fully forgotten.
        0.0
    };
    let report = CriterionReport {
        kappa_hat,
        d_hat,
        bias_hat,
        c_raw,
        c_scaled: scale_criterion(c_raw, config.weight_sum(), d),
        s: set.s(),
        radius: set.radius(),
        alpha: set.alpha,
        seed: config.seed,
    };
    if ![report.c_raw, report.c_scaled, report.kappa_hat, report.d_hat, report.bias_hat]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::NonFinite("criterion report".into()));
    }
    Ok(report)
}

/// `⟨x₀ − x̂₀, x₀⟩`.
fn bias_inner(x0: &[f64], x0_hat: &[f64]) -> f64 {
    x0.iter().zip(x0_hat).map(|(a, b)| (a - b) * a).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub value: f64,
    pub std_err: f64,
    pub s: usize,
}

/// `⟨b̂₀, x₀⟩` with `b̂₀ = x₀ − (1/s)·Σ x̂₀⁽ⁱ⁾`, plus its Monte-Carlo standard error.
pub fn estimate_bias_term_with_se<R: Rng + ?Sized>(
    denoiser: &impl Denoiser,
    x0: &[f64],
    alpha: f64,
    s: usize,
    rng: &mut R,
) -> Result<BiasEstimate> {
    check_dim(denoiser.dim(), x0.len())?;
    if s == 0 {
        return Err(Error::invalid("s", "must be ≥ 1"));
    }
    let points = (0..s)
        .map(|_| {
            let u = sample_sphere(x0.len(), rng)?;
            Ok(perturb(x0, alpha, &u)?.x_tilde)
        })
        .collect::<Result<Vec<_>>>()?;
    use rayon::prelude::*;
    let per: Vec<f64> = points
        .par_iter()
        .map(|x| bias_inner(x0, &denoiser.predict_x0(x)))
        .collect();
    let value = mean(&per);
    let std_err = if s > 1 { std_dev(&per) / (s as f64).sqrt() } else { f64::NAN };
    Ok(BiasEstimate { value, std_err, s })
}

pub fn estimate_bias_term<R: Rng + ?Sized>(
    denoiser: &impl Denoiser,
    x0: &[f64],
    alpha: f64,
    s: usize,
    rng: &mut R,
) -> Result<f64> {
    estimate_bias_term_with_se(denoiser, x0, alpha, s, rng).map(|b| b.value)
}

/// Direct Monte-Carlo of `−(1/s)·Σ⟨vᵢ/(‖vᵢ‖+δ), uᵢ + vᵢ⟩`.
pub fn claim1_lhs(set: &PerturbationSet, scores: &[Vec<f64>], delta: f64) -> f64 {
    let terms: Vec<f64> = scores
        .iter()
        .zip(&set.us)
        .map(|(v, u)| {
            let k = -1.0 / (norm(v) + delta);
            let uv: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
            k * dot(v, &uv)
        })
        .collect();
    mean(&terms)
}
