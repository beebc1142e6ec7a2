//! Train → generate → analyze on a known mixture, from one master seed.

use serde::{Deserialize, Serialize};

use super::model::DenoiserNet;
use super::sample::{generate, generate_samples, terminal_points, TrajectoryRecord};
use super::schedule::NoiseSchedule;
use super::termination::{mode_shares, termination_analysis, TerminationReport, DEFAULT_BOOTSTRAP, DEFAULT_THRESHOLD};
use super::train::{train_denoiser, TrainConfig};
use crate::error::Result;
use crate::rng::{derive_seed, stream};
use crate::surfaces::GaussianMixture;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub n_train: usize,
    pub n_samples: usize,
    pub n_traj: usize,
    pub threshold: f64,
    pub n_boot: usize,
    /// Binomial null; `None` uses one over the number of mixture components.
    pub null_p: Option<f64>,
    pub schedule: NoiseSchedule,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            n_train: 1000,
            n_samples: 1000,
            n_traj: 100,
            threshold: DEFAULT_THRESHOLD,
            n_boot: DEFAULT_BOOTSTRAP,
            null_p: None,
            schedule: NoiseSchedule::default(),
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToyRun {
    pub data: Vec<Vec<f64>>,
    pub net: DenoiserNet,
    pub loss_history: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub trajectories: Vec<TrajectoryRecord>,
    pub report: TerminationReport,
    pub shares: Vec<f64>,
}

/// Sub-seeds: 0 data, 1 training, 2 samples, 3 trajectories, 4 bootstrap.
pub fn run_toy(gmm: &GaussianMixture, cfg: &ToyConfig) -> Result<ToyRun> {
    let data = gmm.sample_n(&mut stream(derive_seed(cfg.seed, 0)), cfg.n_train);
    let train_cfg = TrainConfig {
        seed: derive_seed(cfg.seed, 1),
        ..cfg.train.clone()
    };
    let out = train_denoiser(&data, &cfg.schedule, &train_cfg)?;
    let samples = generate_samples(&out.net, cfg.n_samples, derive_seed(cfg.seed, 2))?;
    let trajectories = generate(&out.net, cfg.n_traj, derive_seed(cfg.seed, 3))?;
    let null_p = cfg.null_p.unwrap_or(1.0 / gmm.n_components() as f64);
    let report = termination_analysis(
        &terminal_points(&trajectories),
        gmm,
        cfg.threshold,
        cfg.n_boot,
        null_p,
        &mut stream(derive_seed(cfg.seed, 4)),
    )?;
    let shares = mode_shares(gmm, &samples)?;
    Ok(ToyRun {
        data,
        net: out.net,
        loss_history: out.loss_history,
        samples,
        trajectories,
        report,
        shares,
    })
}
