//! Manifold-bias criteria for generated-content detection.
//!
//! The crate estimates three local quantities of a log-probability surface
//! `log p` around a point `x0`, all from samples on a sphere:
//!
//! - the total-variation curvature `kappa` (flux of the normalized score
//!   through the sphere, via the divergence theorem),
//! - the mean gradient magnitude `D` over the sphere,
//! - the inner product between a denoiser's statistical bias and `x0`,
//!
//! and combines them into a single detection criterion. Ground truth comes
//! from analytic Gaussian mixtures and dense 2-D grids; a from-scratch toy
//! diffusion model supplies a learned score.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`surfaces`] | mixtures, grids, the peaks surface, finite-difference operators, score oracles |
//! | [`sphere`] | uniform sphere sampling, spherical perturbations, thin-shell statistics |
//! | [`estimators`] | `kappa`, `D`, bias term, combined criterion, error analysis |
//! | [`diffusion`] | noise schedule, MLP denoiser, training, ancestral sampling, KDE, termination statistics |
//! | [`detection`] | threshold calibration, AUC/AP/accuracy, mixture-of-experts combiners |

pub mod detection;
pub mod diffusion;
pub mod error;
pub mod estimators;
pub mod numeric;
pub mod rng;
pub mod sphere;
pub mod surfaces;

pub use error::{Error, Result};
