//! A small denoising diffusion model for low-dimensional data.
//!
//! | module | contents |
//! |---|---|
//! | [`schedule`] | linear β schedule, forward noising, `α_t = 1 − ᾱ_t` bridge |
//! | [`mlp`] | ReLU network with backpropagation |
//! | [`model`] | ε-prediction denoiser, standardization, score and `x̂₀` views |
//! | [`train`] | minibatch training with Adam or SGD |
//! | [`sample`] | ancestral reverse sampling with trajectory recording |
//! | [`kde`] | grid KDE and mean-shift modes |
//! | [`termination`] | endpoint proximity, bootstrap CI, binomial test |
//! | [`model_io`] | JSON persistence |
//! | [`pipeline`] | train, generate and analyze from one seed |

pub mod kde;
pub mod mlp;
pub mod model;
pub mod model_io;
pub mod pipeline;
pub mod sample;
pub mod schedule;
pub mod termination;
pub mod train;

pub use kde::{kde, kde_modes, mean_shift, GridSpec, KdeMode, DEFAULT_BANDWIDTH};
pub use mlp::{gradient_check, Mlp};
pub use model::{denoiser_score, DataScaler, DenoiserAtStep, DenoiserNet, Space};
pub use model_io::{load_model, model_from_json, model_to_json, save_model};
pub use pipeline::{run_toy, ToyConfig, ToyRun};
pub use sample::{generate, generate_samples, reverse_diffuse, terminal_points, TrajectoryRecord};
pub use schedule::{forward_sample, forward_with_noise, make_schedule, NoiseSchedule};
pub use termination::{
    binomial_upper_tail, geometric_null, mode_shares, near_any_mean, termination_analysis, TerminationReport,
    DEFAULT_BOOTSTRAP, DEFAULT_THRESHOLD,
};
pub use train::{train_denoiser, Optimizer, TrainConfig, TrainOutcome};
