//! Ground-truth surfaces: analytic mixtures, dense 2-D grids, and score oracles.

pub mod bumpy;
pub mod gmm;
pub mod grid;
pub mod oracle;
pub mod peaks;

pub use bumpy::{bumpy_surface, plant_bumps, ridge_log_density, PlantedBumps, RidgeSpec};
pub use gmm::{gmm_logpdf, gmm_perturbed, gmm_score, GaussianMixture};
pub use grid::{grid_gradient, grid_tv_curvature, GradientField, ScalarFieldGrid, DEFAULT_EPS};
pub use oracle::{FnScore, GmmScore, GridScore, OracleKind, ScoreOracle};
pub use peaks::{peaks_eval, Orientation, PeaksFunction};
