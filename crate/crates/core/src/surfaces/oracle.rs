//! A single interface for anything that maps a point to an (approximate) score `∇ log p`.

use serde::{Deserialize, Serialize};

use super::gmm::GaussianMixture;
use super::grid::{grid_gradient, GradientField, ScalarFieldGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    AnalyticGmm,
    GridInterpolated,
    DenoiserBacked,
    Synthetic,
}

/// Returns a finite `dim()`-vector for any finite input of length `dim()`.
pub trait ScoreOracle: Sync {
    fn dim(&self) -> usize;
    fn score(&self, x: &[f64]) -> Vec<f64>;
    fn kind(&self) -> OracleKind;
}

impl<T: ScoreOracle + ?Sized> ScoreOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn score(&self, x: &[f64]) -> Vec<f64> {
        (**self).score(x)
    }
    fn kind(&self) -> OracleKind {
        (**self).kind()
    }
}

/// Analytic score of a mixture, optionally of its `α`-perturbed law.
#[derive(Debug, Clone)]
pub struct GmmScore {
    gmm: GaussianMixture,
    alpha: Option<f64>,
}

impl GmmScore {
    pub fn new(gmm: GaussianMixture) -> Self {
        Self { gmm, alpha: None }
    }

    /// Score of `p_α`, the law of `√(1−α)·x₀ + √α·ε`.
    pub fn perturbed(gmm: &GaussianMixture, alpha: f64) -> Result<Self> {
        Ok(Self {
            gmm: gmm.perturbed(alpha)?,
            alpha: Some(alpha),
        })
    }

    pub fn mixture(&self) -> &GaussianMixture {
        &self.gmm
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }
}

impl ScoreOracle for GmmScore {
    fn dim(&self) -> usize {
        self.gmm.dim()
    }
    fn score(&self, x: &[f64]) -> Vec<f64> {
        self.gmm.score_unchecked(x)
    }
    fn kind(&self) -> OracleKind {
        OracleKind::AnalyticGmm
    }
}

/// Bilinear interpolation of the central-difference gradient of a 2-D grid.
/// Queries outside the grid clamp to its border.
#[derive(Debug, Clone)]
pub struct GridScore {
    gradient: GradientField,
}

impl GridScore {
    pub fn new(grid: &ScalarFieldGrid) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::invalid("grid", "grid oracle needs a 2-D grid"));
        }
        Ok(Self {
            gradient: grid_gradient(grid)?,
        })
    }

    pub fn gradient(&self) -> &GradientField {
        &self.gradient
    }
}

impl ScoreOracle for GridScore {
    fn dim(&self) -> usize {
        2
    }
    fn score(&self, x: &[f64]) -> Vec<f64> {
        self.gradient.sample(x)
    }
    fn kind(&self) -> OracleKind {
        OracleKind::GridInterpolated
    }
}

/// Closure-backed oracle for synthetic fields.
pub struct FnScore<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> FnScore<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> ScoreOracle for FnScore<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn score(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
    fn kind(&self) -> OracleKind {
        OracleKind::Synthetic
    }
}
