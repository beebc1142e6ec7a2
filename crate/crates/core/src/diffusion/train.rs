//! Minibatch training of the ε-prediction network.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};
use super::model::{DataScaler, DenoiserNet};
use super::schedule::{forward_with_noise, NoiseSchedule};
use crate::error::{Error, Result};
use crate::rng::{normal_vec, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub widths: Vec<usize>,
    pub optimizer: Optimizer,
    /// Standardize the data per axis before training.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            batch_size: 100,
            learning_rate: 1e-3,
            widths: vec![64, 64],
            optimizer: Optimizer::Adam,
            standardize: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be ≥ 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be ≥ 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("lr", "must be a positive finite number"));
        }
        if self.widths.is_empty() || self.widths.contains(&0) {
            return Err(Error::invalid("widths", "need at least one hidden layer, all widths ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: DenoiserNet,
    /// Mean minibatch loss per epoch.
    pub loss_history: Vec<f64>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Mlp, g: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        for (i, p) in net.params_mut().into_iter().enumerate() {
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * g[i];
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            *p -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + ADAM_EPS);
        }
    }
}

fn sgd_step(net: &mut Mlp, g: &[f64], lr: f64) {
    for (p, gi) in net.params_mut().into_iter().zip(g) {
        *p -= lr * gi;
    }
}

/// Trains `ε̂(x_t, t)` by MSE against the injected noise, with `t` uniform per sample.
///
/// Fails with [`Error::Diverged`] as soon as a loss or parameter becomes non-finite.
pub fn train_denoiser(data: &[Vec<f64>], schedule: &NoiseSchedule, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let d = data.first().map(Vec::len).ok_or(Error::EmptyInput("training data"))?;
    if d == 0 || data.iter().any(|v| v.len() != d) {
        return Err(Error::invalid("data", "rows must share one nonzero dimension"));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training data".into()));
    }
    let scaler = if cfg.standardize {
        DataScaler::fit(data)?
    } else {
        DataScaler::identity(d)
    };
    let z: Vec<Vec<f64>> = data.iter().map(|x| scaler.to_model(x)).collect();

    let mut rng = stream(cfg.seed);
    let mut sizes = vec![d + 1];
    sizes.extend_from_slice(&cfg.widths);
    sizes.push(d);
    let mut mlp = Mlp::new(&sizes, &mut rng)?;
    let mut adam = Adam::new(mlp.n_params());
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut losses = Vec::new();
        for batch in order.chunks(cfg.batch_size) {
            let mut inputs = Vec::with_capacity(batch.len());
            let mut targets = Vec::with_capacity(batch.len());
            for &i in batch {
                let t = rng.random_range(0..schedule.steps);
                let eps = normal_vec(&mut rng, d);
                let mut input = forward_with_noise(&z[i], &eps, schedule.alpha_bar(t));
                input.push(schedule.time_feature(t));
                inputs.push(input);
                targets.push(eps);
            }
            let (loss, grads): (f64, Gradients) = mlp.mse_and_grad(&inputs, &targets);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            let g = grads.flatten();
            match cfg.optimizer {
                Optimizer::Adam => adam.step(&mut mlp, &g, cfg.learning_rate),
                Optimizer::Sgd => sgd_step(&mut mlp, &g, cfg.learning_rate),
            }
            losses.push(loss);
        }
        let epoch_loss = crate::numeric::mean(&losses);
        if !mlp.is_finite() || !epoch_loss.is_finite() {
            return Err(Error::Diverged { epoch, loss: epoch_loss });
        }
        history.push(epoch_loss);
    }
    Ok(TrainOutcome {
        net: DenoiserNet::new(mlp, schedule.clone(), scaler)?,
        loss_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_decreases_on_a_single_gaussian() {
        let mut rng = stream(3);
        let data: Vec<Vec<f64>> = (0..500).map(|_| normal_vec(&mut rng, 2)).collect();
        let cfg = TrainConfig {
            epochs: 60,
            widths: vec![32, 32],
            seed: 1,
            ..TrainConfig::default()
        };
        let out = train_denoiser(&data, &NoiseSchedule::default(), &cfg).unwrap();
        let first = out.loss_history[..5].iter().sum::<f64>() / 5.0;
        let last = out.loss_history[55..].iter().sum::<f64>() / 5.0;
        assert!(last < first, "{first} → {last}");
    }

    #[test]
    fn training_is_deterministic() {
        let data: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 * 0.1, (i % 7) as f64]).collect();
        let cfg = TrainConfig {
            epochs: 3,
            widths: vec![8],
            seed: 9,
            ..TrainConfig::default()
        };
        let a = train_denoiser(&data, &NoiseSchedule::default(), &cfg).unwrap();
        let b = train_denoiser(&data, &NoiseSchedule::default(), &cfg).unwrap();
        assert_eq!(a.net, b.net);
        assert_eq!(a.loss_history, b.loss_history);
    }

    #[test]
    fn huge_learning_rate_reports_divergence() {
        let data: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, -(i as f64)]).collect();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 1e6,
            optimizer: Optimizer::Sgd,
            widths: vec![16, 16],
            ..TrainConfig::default()
        };
        let err = train_denoiser(&data, &NoiseSchedule::default(), &cfg).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = NoiseSchedule::default();
        assert!(train_denoiser(&[], &s, &TrainConfig::default()).is_err());
        assert!(train_denoiser(&[vec![1.0], vec![1.0, 2.0]], &s, &TrainConfig::default()).is_err());
        let cfg = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(train_denoiser(&[vec![1.0], vec![2.0]], &s, &cfg).is_err());
    }
}
