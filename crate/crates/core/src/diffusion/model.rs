//! The ε-prediction denoiser and its score/clean-signal views.
//!
//! The network works in standardized coordinates `z = (x − shift)/scale`.
//! Without that, the schedule's final `ᾱ_T ≈ 0.36` leaves `x_T` correlated
//! with data far from the origin and ancestral sampling loses modes.
//! Data-space scores follow from the chain rule: `∇ₓ log p = ∇_z log p / scale`.

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::schedule::NoiseSchedule;
use crate::error::{check_dim, Error, Result};
use crate::estimators::Denoiser;
use crate::surfaces::{OracleKind, ScoreOracle};

/// Per-axis affine standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataScaler {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl DataScaler {
    pub fn identity(d: usize) -> Self {
        Self {
            shift: vec![0.0; d],
            scale: vec![1.0; d],
        }
    }

    /// Mean and population standard deviation per axis.
    pub fn fit(data: &[Vec<f64>]) -> Result<Self> {
        let d = data.first().map(Vec::len).ok_or(Error::EmptyInput("training data"))?;
        let shift = crate::numeric::mean_vec(data);
        let scale: Vec<f64> = (0..d)
            .map(|k| {
                let sq: Vec<f64> = data.iter().map(|v| (v[k] - shift[k]).powi(2)).collect();
                crate::numeric::mean(&sq).sqrt()
            })
            .collect();
        if scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("data", "every axis needs nonzero spread"));
        }
        Ok(Self { shift, scale })
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn to_model(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn to_data(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.shift).zip(&self.scale).map(|((v, m), s)| v * s + m).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiserNet {
    pub mlp: Mlp,
    pub schedule: NoiseSchedule,
    pub scaler: DataScaler,
}

impl DenoiserNet {
    /// Validates that the network maps `[z, t/T]` to an ε of the scaler's dimension.
    pub fn new(mlp: Mlp, schedule: NoiseSchedule, scaler: DataScaler) -> Result<Self> {
        let d = scaler.dim();
        check_dim(d + 1, mlp.input_dim())?;
        check_dim(d, mlp.output_dim())?;
        Ok(Self { mlp, schedule, scaler })
    }

    /// Untrained network with all parameters zero and identity scaling.
    pub fn zero(d: usize, hidden: &[usize], schedule: NoiseSchedule) -> Result<Self> {
        let mut sizes = vec![d + 1];
        sizes.extend_from_slice(hidden);
        sizes.push(d);
        Self::new(Mlp::zeros(&sizes)?, schedule, DataScaler::identity(d))
    }

    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    /// Hidden-layer widths.
    pub fn widths(&self) -> Vec<usize> {
        let s = self.mlp.sizes();
        s[1..s.len() - 1].to_vec()
    }

    /// `ε̂(z, t)` in model coordinates.
    pub fn predict_eps(&self, z: &[f64], t: usize) -> Vec<f64> {
        let mut input = Vec::with_capacity(z.len() + 1);
        input.extend_from_slice(z);
        input.push(self.schedule.time_feature(t));
        self.mlp.forward(&input)
    }

    /// `∇_z log p_t(z) ≈ −ε̂(z, t)/√(1−ᾱ_t)`.
    pub fn model_score(&self, z: &[f64], t: usize) -> Vec<f64> {
        let k = -1.0 / (1.0 - self.schedule.alpha_bar(t)).sqrt();
        self.predict_eps(z, t).iter().map(|e| k * e).collect()
    }

    /// Model-coordinate score mapped to data coordinates.
    pub fn data_score(&self, x: &[f64], t: usize) -> Vec<f64> {
        let z = self.scaler.to_model(x);
        self.model_score(&z, t)
            .iter()
            .zip(&self.scaler.scale)
            .map(|(s, c)| s / c)
            .collect()
    }

    /// `ẑ₀ = (z_t − √(1−ᾱ_t)·ε̂)/√ᾱ_t` in model coordinates.
    pub fn predict_z0(&self, z: &[f64], t: usize) -> Vec<f64> {
        let ab = self.schedule.alpha_bar(t);
        let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
        self.predict_eps(z, t)
            .iter()
            .zip(z)
            .map(|(e, zi)| (zi - b * e) / a)
            .collect()
    }
}

/// Score of `p_t` in data coordinates.
pub fn denoiser_score(net: &DenoiserNet, x: &[f64], t: usize) -> Result<Vec<f64>> {
    check_dim(net.dim(), x.len())?;
    net.schedule.check_step(t)?;
    Ok(net.data_score(x, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Standardized coordinates the network was trained in.
    Model,
    /// Original data coordinates.
    Data,
}

/// A trained denoiser frozen at one step `t`, viewed as a score oracle and a clean-signal predictor.
#[derive(Debug, Clone)]
pub struct DenoiserAtStep<'a> {
    pub net: &'a DenoiserNet,
    pub t: usize,
    pub space: Space,
}

impl<'a> DenoiserAtStep<'a> {
    pub fn new(net: &'a DenoiserNet, t: usize, space: Space) -> Result<Self> {
        net.schedule.check_step(t)?;
        Ok(Self { net, t, space })
    }

    /// Matching scheduling scalar `α_t = 1 − ᾱ_t`.
    pub fn alpha(&self) -> f64 {
        self.net.schedule.perturbation_alpha(self.t)
    }
}

impl ScoreOracle for DenoiserAtStep<'_> {
    fn dim(&self) -> usize {
        self.net.dim()
    }
    fn score(&self, x: &[f64]) -> Vec<f64> {
        match self.space {
            Space::Model => self.net.model_score(x, self.t),
            Space::Data => self.net.data_score(x, self.t),
        }
    }
    fn kind(&self) -> OracleKind {
        OracleKind::DenoiserBacked
    }
}

impl Denoiser for DenoiserAtStep<'_> {
    fn dim(&self) -> usize {
        self.net.dim()
    }
    fn predict_x0(&self, x: &[f64]) -> Vec<f64> {
        match self.space {
            Space::Model => self.net.predict_z0(x, self.t),
            Space::Data => {
                let z = self.net.scaler.to_model(x);
                self.net.scaler.to_data(&self.net.predict_z0(&z, self.t))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_has_zero_score() {
        let net = DenoiserNet::zero(2, &[8, 8], NoiseSchedule::default()).unwrap();
        assert_eq!(denoiser_score(&net, &[3.0, -1.0], 50).unwrap(), vec![0.0, 0.0]);
        assert!(denoiser_score(&net, &[3.0, -1.0], 100).is_err());
        assert!(denoiser_score(&net, &[3.0], 1).is_err());
    }

    #[test]
    fn scaler_round_trip() {
        let data = vec![vec![1.0, 10.0], vec![3.0, 14.0], vec![2.0, 12.0]];
        let s = DataScaler::fit(&data).unwrap();
        let z = s.to_model(&[2.5, 11.0]);
        let back = s.to_data(&z);
        assert!((back[0] - 2.5).abs() < 1e-14 && (back[1] - 11.0).abs() < 1e-14);
        assert!(DataScaler::fit(&[vec![1.0, 2.0], vec![1.0, 3.0]]).is_err());
    }

    #[test]
    fn predicted_z0_is_tweedie_of_model_score() {
        let mut rng = crate::rng::stream(4);
        let mlp = Mlp::new(&[3, 8, 2], &mut rng).unwrap();
        let net = DenoiserNet::new(mlp, NoiseSchedule::default(), DataScaler::identity(2)).unwrap();
        let t = 40;
        let z = [0.3, -1.2];
        let via_score = crate::estimators::tweedie(&z, &net.model_score(&z, t), net.schedule.perturbation_alpha(t));
        let direct = net.predict_z0(&z, t);
        for k in 0..2 {
            assert!((via_score[k] - direct[k]).abs() < 1e-12);
        }
    }
}
