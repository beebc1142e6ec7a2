//! Curvature `κ` and gradient magnitude `D` over a sphere, plus the grid-quadrature truth.
//!
//! By the divergence theorem, the ball average of `−∇·(v/‖v‖)` equals
//! `−(1/|B|)∮⟨v/‖v‖, n_out⟩ dS`, and `|∂B|/|B| = d/R`, which gives the
//! normalized boundary estimator
//! `κ̂ = −(d/R)·(1/s)·Σ⟨vᵢ/(‖vᵢ‖+δ), n_out,ᵢ⟩`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_boundary_args, Boundary};
use crate::error::{check_dim, Error, Result};
use crate::numeric::{dot, mean, norm};
use crate::surfaces::{grid_tv_curvature, ScalarFieldGrid, ScoreOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KappaForm {
    /// Ball-averaged curvature, `d/R` scaling.
    #[default]
    Normalized,
    /// Inward flux `Σ⟨v̂, n_in⟩·2πR/N`; 2-D only. Equals `πR²` times the normalized form.
    RawFlux,
}

impl KappaForm {
    pub fn from_normalize_flag(normalize_by_ball: bool) -> Self {
        if normalize_by_ball {
            Self::Normalized
        } else {
            Self::RawFlux
        }
    }
}

/// `κ̂` from precomputed scores at the boundary points.
pub fn kappa_from_scores(boundary: &Boundary, scores: &[Vec<f64>], delta: f64, form: KappaForm) -> Result<f64> {
    let d = boundary.center.len();
    let terms = scores
        .iter()
        .zip(&boundary.normals)
        .map(|(v, n)| {
            let denom = norm(v) + delta;
            if denom == 0.0 {
                return Err(Error::NonFinite("zero score on the boundary with δ = 0".into()));
            }
            Ok(dot(v, n) / denom)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = mean(&terms);
    let k = match form {
        KappaForm::Normalized => -m * d as f64 / boundary.radius,
        KappaForm::RawFlux => {
            if d != 2 {
                return Err(Error::invalid("normalize_by_ball", "the raw flux form is defined for d = 2 only"));
            }
            -m * 2.0 * std::f64::consts::PI * boundary.radius
        }
    };
    if !k.is_finite() {
        return Err(Error::NonFinite("kappa estimate".into()));
    }
    Ok(k)
}

/// Boundary Monte-Carlo estimate of `κ` around `center`.
pub fn estimate_kappa<R: Rng + ?Sized>(
    oracle: &impl ScoreOracle,
    center: &[f64],
    radius: f64,
    s: usize,
    rng: &mut R,
    delta: f64,
    form: KappaForm,
) -> Result<f64> {
    check_dim(oracle.dim(), center.len())?;
    check_boundary_args(center.len(), radius, s)?;
    let b = Boundary::draw(center, radius, s, rng)?;
    kappa_from_scores(&b, &b.scores(oracle), delta, form)
}

/// `D̂ = (1/s)·Σ‖v(xᵢ)‖` over uniform boundary points.
pub fn estimate_d<R: Rng + ?Sized>(
    oracle: &impl ScoreOracle,
    center: &[f64],
    radius: f64,
    s: usize,
    rng: &mut R,
) -> Result<f64> {
    check_dim(oracle.dim(), center.len())?;
    let b = Boundary::draw(center, radius, s, rng)?;
    Ok(mean_norm(&b.scores(oracle)))
}

pub(crate) fn mean_norm(scores: &[Vec<f64>]) -> f64 {
    mean(&scores.iter().map(|v| norm(v)).collect::<Vec<_>>())
}

/// Riemann sum of the grid curvature over nodes inside the disc, divided by `πR²`.
pub fn true_kappa_volume(grid: &ScalarFieldGrid, center: &[f64], radius: f64, eps: f64) -> Result<f64> {
    let curvature = grid_tv_curvature(grid, eps)?;
    kappa_volume_from_curvature(&curvature, center, radius)
}

/// Disc average of a precomputed curvature map.
pub fn kappa_volume_from_curvature(curvature: &ScalarFieldGrid, center: &[f64], radius: f64) -> Result<f64> {
    check_dim(2, center.len())?;
    if !(radius > 0.0) {
        return Err(Error::invalid("radius", "must be > 0"));
    }
    for a in 0..2 {
        let (lo, hi) = curvature.extent(a);
        let margin = curvature.spacing()[a];
        if center[a] - radius - margin < lo || center[a] + radius + margin > hi {
            return Err(Error::BallOutsideGrid {
                center: center.to_vec(),
                radius,
            });
        }
    }
    let inside: Vec<f64> = (0..curvature.len())
        .filter_map(|idx| {
            let p = curvature.coords(idx);
            let r2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
            (r2 <= radius * radius).then(|| curvature.values()[idx])
        })
        .collect();
    let area = std::f64::consts::PI * radius * radius;
    Ok(crate::numeric::pairwise_sum(&inside) * curvature.cell_volume() / area)
}
