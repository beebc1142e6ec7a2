//! Fully connected ReLU network with hand-written backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::standard_normal;

/// Affine layer `y = W x + b`, `W` stored row-major as `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            out.push(self.biases[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>());
        }
    }
}

/// ReLU between layers, identity on the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Parameter gradients shaped like [`Mlp::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn scale(&mut self, k: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|g| *g *= k);
        }
    }

    /// All entries, layer by layer: weights then biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

impl Mlp {
    /// He-normal weights, zero biases. `sizes = [input, hidden..., output]`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid("widths", "need input and output sizes, all ≥ 1"));
        }
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let std = (2.0 / n_in as f64).sqrt();
                Layer {
                    n_in,
                    n_out,
                    weights: (0..n_in * n_out).map(|_| std * standard_normal(rng)).collect(),
                    biases: vec![0.0; n_out],
                }
            })
            .collect();
        Ok(Self { layers })
    }

    /// All parameters zero: the network outputs zero everywhere.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid("widths", "need input and output sizes, all ≥ 1"));
        }
        Ok(Self {
            layers: sizes
                .windows(2)
                .map(|w| Layer {
                    n_in: w[0],
                    n_out: w[1],
                    weights: vec![0.0; w[0] * w[1]],
                    biases: vec![0.0; w[1]],
                })
                .collect(),
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].n_in];
        s.extend(self.layers.iter().map(|l| l.n_out));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.n_out)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Activations of every layer (post-ReLU for hidden layers), input first.
    fn forward_cached(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.n_out);
            layer.apply(&acts[i], &mut out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out);
        }
        acts
    }

    /// Adds `∂/∂θ` of `½·scale·‖f(x) − y‖²` into `grads`; returns `‖f(x) − y‖²`.
    pub fn accumulate_sq_error_grad(&self, x: &[f64], y: &[f64], scale: f64, grads: &mut Gradients) -> f64 {
        let acts = self.forward_cached(x);
        let out = acts.last().expect("network has layers");
        let mut delta: Vec<f64> = out.iter().zip(y).map(|(o, t)| o - t).collect();
        let sq: f64 = delta.iter().map(|d| d * d).sum();
        delta.iter_mut().for_each(|d| *d *= scale);
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &acts[li];
            let gw = &mut grads.weights[li];
            let gb = &mut grads.biases[li];
            for o in 0..layer.n_out {
                gb[o] += delta[o];
                let row = &mut gw[o * layer.n_in..(o + 1) * layer.n_in];
                for (g, v) in row.iter_mut().zip(input) {
                    *g += delta[o] * v;
                }
            }
            if li > 0 {
                let mut prev = vec![0.0; layer.n_in];
                for o in 0..layer.n_out {
                    let row = &layer.weights[o * layer.n_in..(o + 1) * layer.n_in];
                    for (p, w) in prev.iter_mut().zip(row) {
                        *p += delta[o] * w;
                    }
                }
                // ReLU derivative taken as 0 at the kink.
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        sq
    }

    /// Mean squared error over every output coordinate of a batch, with its gradient.
    pub fn mse_and_grad(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> (f64, Gradients) {
        let mut g = Gradients::zeros_like(self);
        let n_el = (inputs.len() * self.output_dim()) as f64;
        // d/dθ of (1/n_el)·Σ‖·‖² is (2/n_el)·Σ (f − y)·∂f.
        let total: f64 = inputs
            .iter()
            .zip(targets)
            .map(|(x, y)| self.accumulate_sq_error_grad(x, y, 2.0 / n_el, &mut g))
            .sum();
        (total / n_el, g)
    }

    pub fn mse(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
        let n_el = (inputs.len() * self.output_dim()) as f64;
        inputs
            .iter()
            .zip(targets)
            .map(|(x, y)| self.forward(x).iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum::<f64>()
            / n_el
    }

    /// Mutable views of every parameter in [`Gradients::flatten`] order.
    pub fn params_mut(&mut self) -> Vec<&mut f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &mut self.layers {
            out.extend(l.weights.iter_mut());
            out.extend(l.biases.iter_mut());
        }
        out
    }
}

/// Relative error `‖a − f‖ / max(‖a‖ + ‖f‖, tiny)` between analytic and finite-difference gradients.
pub fn gradient_check(net: &Mlp, xs: &[Vec<f64>], ys: &[Vec<f64>], h: f64) -> f64 {
    let (_, g) = net.mse_and_grad(xs, ys);
    let analytic = g.flatten();
    let mut probe = net.clone();
    let n = probe.n_params();
    let mut fd = Vec::with_capacity(n);
    for i in 0..n {
        let orig = *probe.params_mut()[i];
        *probe.params_mut()[i] = orig + h;
        let up = probe.mse(xs, ys);
        *probe.params_mut()[i] = orig - h;
        let dn = probe.mse(xs, ys);
        *probe.params_mut()[i] = orig;
        fd.push((up - dn) / (2.0 * h));
    }
    let diff: f64 = analytic.iter().zip(&fd).map(|(a, f)| (a - f).powi(2)).sum::<f64>().sqrt();
    let scale = crate::numeric::norm(&analytic) + crate::numeric::norm(&fd);
    diff / scale.max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn backprop_matches_finite_differences() {
        for batch in 0..5u64 {
            let mut rng = substream(77, batch);
            let net = Mlp::new(&[3, 8, 8, 2], &mut rng).unwrap();
            let xs: Vec<Vec<f64>> = (0..6).map(|_| crate::rng::normal_vec(&mut rng, 3)).collect();
            let ys: Vec<Vec<f64>> = (0..6).map(|_| crate::rng::normal_vec(&mut rng, 2)).collect();
            let rel = gradient_check(&net, &xs, &ys, 1e-6);
            assert!(rel < 1e-5, "batch {batch}: {rel}");
        }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[3, 4, 2]).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 0.5]), vec![0.0, 0.0]);
    }

    #[test]
    fn sizes_round_trip() {
        let net = Mlp::new(&[3, 64, 64, 2], &mut substream(1, 0)).unwrap();
        assert_eq!(net.sizes(), vec![3, 64, 64, 2]);
        assert_eq!(net.n_params(), 3 * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);
        assert!(Mlp::new(&[3], &mut substream(1, 0)).is_err());
    }

    #[test]
    fn zero_predictor_loss_is_target_second_moment() {
        let net = Mlp::zeros(&[1, 2, 2]).unwrap();
        let xs = vec![vec![0.0], vec![1.0]];
        let ys = vec![vec![1.0, -1.0], vec![2.0, 0.0]];
        assert!((net.mse(&xs, &ys) - 6.0 / 4.0).abs() < 1e-15);
    }
}
