//! Logistic regression by full-batch gradient descent on standardized features.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticModel {
    /// Mean log-loss gradient descent; constant features get scale 1.
    pub fn fit(x: &[Vec<f64>], y: &[bool], iterations: usize, lr: f64) -> Result<Self> {
        let d = super::check_training_set(x, y)?;
        let shift = crate::numeric::mean_vec(x);
        let scale: Vec<f64> = (0..d)
            .map(|k| {
                let col: Vec<f64> = x.iter().map(|v| v[k]).collect();
                let s = crate::numeric::std_dev(&col);
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        let z: Vec<Vec<f64>> = x
            .iter()
            .map(|v| v.iter().zip(&shift).zip(&scale).map(|((a, m), s)| (a - m) / s).collect())
            .collect();
        let n = x.len() as f64;
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        for _ in 0..iterations {
            let mut gw = vec![0.0; d];
            let mut gb = 0.0;
            for (zi, yi) in z.iter().zip(y) {
                let p = sigmoid(b + crate::numeric::dot(&w, zi));
                let r = p - if *yi { 1.0 } else { 0.0 };
                gb += r;
                for (g, v) in gw.iter_mut().zip(zi) {
                    *g += r * v;
                }
            }
            b -= lr * gb / n;
            for (wk, g) in w.iter_mut().zip(&gw) {
                *wk -= lr * g / n;
            }
        }
        Ok(Self {
            weights: w,
            bias: b,
            shift,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Probability of the generated class.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z: f64 = x
            .iter()
            .zip(&self.shift)
            .zip(&self.scale)
            .zip(&self.weights)
            .map(|(((v, m), s), w)| w * (v - m) / s)
            .sum();
        sigmoid(self.bias + z)
    }
}
