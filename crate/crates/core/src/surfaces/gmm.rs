//! Diagonal-covariance Gaussian mixtures with analytic log-density and score.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::standard_normal;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Weighted mixture of axis-aligned Gaussians.
///
/// Serializes as `{"means": [[..]], "variances": [[..]], "weights": [..]}`
/// with one per-axis variance vector per component; deserialization
/// re-validates every invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureDoc", into = "MixtureDoc")]
pub struct GaussianMixture {
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MixtureDoc {
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<MixtureDoc> for GaussianMixture {
    type Error = Error;
    fn try_from(doc: MixtureDoc) -> Result<Self> {
        GaussianMixture::new(doc.means, doc.variances, doc.weights)
    }
}

impl From<GaussianMixture> for MixtureDoc {
    fn from(g: GaussianMixture) -> Self {
        MixtureDoc {
            means: g.means,
            variances: g.variances,
            weights: g.weights,
        }
    }
}

impl GaussianMixture {
    pub fn new(means: Vec<Vec<f64>>, variances: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let k = means.len();
        if k == 0 {
            return Err(Error::EmptyInput("mixture has no components"));
        }
        if variances.len() != k || weights.len() != k {
            return Err(Error::invalid(
                "components",
                format!(
                    "{k} means, {} variance vectors, {} weights",
                    variances.len(),
                    weights.len()
                ),
            ));
        }
        let d = means[0].len();
        if d == 0 {
            return Err(Error::invalid("means", "dimension must be at least 1"));
        }
        for (m, v) in means.iter().zip(&variances) {
            check_dim(d, m.len())?;
            check_dim(d, v.len())?;
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("means", "non-finite entry"));
            }
            if v.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::invalid("variances", "entries must be finite and > 0"));
            }
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("weights", "entries must be finite and > 0"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weights", format!("sum to {total}, not 1")));
        }
        Ok(Self {
            means,
            variances,
            weights,
        })
    }

    /// Components sharing one isotropic variance.
    pub fn isotropic(means: Vec<Vec<f64>>, variance: f64, weights: Vec<f64>) -> Result<Self> {
        let variances = means.iter().map(|m| vec![variance; m.len()]).collect();
        Self::new(means, variances, weights)
    }

    /// Equal-weight isotropic mixture.
    pub fn uniform(means: Vec<Vec<f64>>, variance: f64) -> Result<Self> {
        let k = means.len();
        Self::isotropic(means, variance, vec![1.0 / k as f64; k])
    }

    /// Three-mode 2-D mixture used by the toy diffusion experiments:
    /// means (−5,−5), (0,−5), (−5,0), variance 0.1, equal weights.
    pub fn three_mode() -> Self {
        Self::uniform(
            vec![vec![-5.0, -5.0], vec![0.0, -5.0], vec![-5.0, 0.0]],
            0.1,
        )
        .expect("static mixture is valid")
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn n_components(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn component_logpdf(&self, k: usize, x: &[f64]) -> f64 {
        let mut q = 0.0;
        let mut logdet = 0.0;
        for ((xi, mi), vi) in x.iter().zip(&self.means[k]).zip(&self.variances[k]) {
            let r = xi - mi;
            q += r * r / vi;
            logdet += vi.ln();
        }
        -0.5 * (self.dim() as f64 * LN_2PI + logdet + q)
    }

    /// Per-component `ln w_k + ln N_k(x)`.
    fn joint_logs(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_components())
            .map(|k| self.weights[k].ln() + self.component_logpdf(k, x))
            .collect()
    }

    pub fn logpdf(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(log_sum_exp(&self.joint_logs(x)))
    }

    /// Posterior component probabilities at `x`.
    pub fn responsibilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.responsibilities_unchecked(x))
    }

    fn responsibilities_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let logs = self.joint_logs(x);
        let lse = log_sum_exp(&logs);
        logs.iter().map(|l| (l - lse).exp()).collect()
    }

    /// Analytic `∇ log p(x) = Σ_k r_k(x) (μ_k − x) / σ_k²`.
    pub fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.score_unchecked(x))
    }

    pub(crate) fn score_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let r = self.responsibilities_unchecked(x);
        let mut s = vec![0.0; x.len()];
        for (k, rk) in r.iter().enumerate() {
            for (j, sj) in s.iter_mut().enumerate() {
                *sj += rk * (self.means[k][j] - x[j]) / self.variances[k][j];
            }
        }
        s
    }

    /// Law of `√(1−α)·x₀ + √α·ε` for `x₀` drawn from this mixture.
    pub fn perturbed(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1]")));
        }
        let keep = 1.0 - alpha;
        let scale = keep.sqrt();
        Ok(Self {
            means: self
                .means
                .iter()
                .map(|m| m.iter().map(|v| scale * v).collect())
                .collect(),
            variances: self
                .variances
                .iter()
                .map(|v| v.iter().map(|s| keep * s + alpha).collect())
                .collect(),
            weights: self.weights.clone(),
        })
    }

    /// Affine image `x ↦ (x − shift) / scale` applied per axis.
    pub fn standardized(&self, shift: &[f64], scale: &[f64]) -> Result<Self> {
        check_dim(self.dim(), shift.len())?;
        check_dim(self.dim(), scale.len())?;
        let means = self
            .means
            .iter()
            .map(|m| m.iter().zip(shift).zip(scale).map(|((v, s), c)| (v - s) / c).collect())
            .collect();
        let variances = self
            .variances
            .iter()
            .map(|v| v.iter().zip(scale).map(|(s, c)| s / (c * c)).collect())
            .collect();
        Self::new(means, variances, self.weights.clone())
    }

    /// Mahalanobis distance from `x` to component `k`.
    pub fn mahalanobis(&self, k: usize, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if k >= self.n_components() {
            return Err(Error::invalid("component", format!("{k} out of range")));
        }
        let q: f64 = x
            .iter()
            .zip(&self.means[k])
            .zip(&self.variances[k])
            .map(|((xi, mi), vi)| (xi - mi) * (xi - mi) / vi)
            .sum();
        Ok(q.sqrt())
    }

    /// Closest component by Mahalanobis distance, as `(index, distance)`.
    pub fn nearest_component(&self, x: &[f64]) -> Result<(usize, f64)> {
        let mut best = (0, f64::INFINITY);
        for k in 0..self.n_components() {
            let m = self.mahalanobis(k, x)?;
            if m < best.1 {
                best = (k, m);
            }
        }
        Ok(best)
    }

    /// Ancestral draw: component by weight, then per-axis normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = self.n_components() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                k = i;
                break;
            }
        }
        self.means[k]
            .iter()
            .zip(&self.variances[k])
            .map(|(m, v)| m + v.sqrt() * standard_normal(rng))
            .collect()
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn gmm_logpdf(gmm: &GaussianMixture, x: &[f64]) -> Result<f64> {
    gmm.logpdf(x)
}

pub fn gmm_score(gmm: &GaussianMixture, x: &[f64]) -> Result<Vec<f64>> {
    gmm.score(x)
}

pub fn gmm_perturbed(gmm: &GaussianMixture, alpha: f64) -> Result<GaussianMixture> {
    gmm.perturbed(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn std_normal_2d() -> GaussianMixture {
        GaussianMixture::uniform(vec![vec![0.0, 0.0]], 1.0).unwrap()
    }

    #[test]
    fn logpdf_standard_normal_at_mode() {
        let g = std_normal_2d();
        assert!((g.logpdf(&[0.0, 0.0]).unwrap() + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn logpdf_three_mode_at_first_mean() {
        let g = GaussianMixture::three_mode();
        // Closed form for the dominant component; the others sit 5/√0.1 ≈ 15.8 σ away.
        let expected = ((1.0 / 3.0) * (1.0 / (2.0 * std::f64::consts::PI * 0.1))).ln();
        assert!((g.logpdf(&[-5.0, -5.0]).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn logpdf_three_mode_symmetry() {
        let g = GaussianMixture::three_mode();
        assert_eq!(g.logpdf(&[-5.0, 0.0]).unwrap(), g.logpdf(&[0.0, -5.0]).unwrap());
    }

    #[test]
    fn score_simple_cases() {
        let g = GaussianMixture::uniform(vec![vec![1.0, -2.0]], 0.7).unwrap();
        assert_eq!(g.score(&[1.0, -2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(std_normal_2d().score(&[1.0, 0.0]).unwrap(), vec![-1.0, 0.0]);
    }

    fn fd_score(g: &GaussianMixture, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|j| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[j] += h;
                m[j] -= h;
                (g.logpdf(&p).unwrap() - g.logpdf(&m).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn score_matches_finite_difference_near_mode() {
        let g = GaussianMixture::three_mode();
        let x = [-5.0, -4.9];
        let a = g.score(&x).unwrap();
        let f = fd_score(&g, &x, 1e-5);
        for j in 0..2 {
            assert!((a[j] - f[j]).abs() < 1e-4, "{a:?} vs {f:?}");
        }
    }

    #[test]
    fn score_matches_finite_difference_at_random_points() {
        let g = GaussianMixture::new(
            vec![vec![-1.0, 0.5, 2.0], vec![1.5, -1.0, 0.0]],
            vec![vec![0.5, 1.2, 0.8], vec![1.0, 0.3, 2.0]],
            vec![0.4, 0.6],
        )
        .unwrap();
        let mut rng = stream(11);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let a = g.score(&x).unwrap();
            let f = fd_score(&g, &x, 1e-5);
            for j in 0..3 {
                assert!((a[j] - f[j]).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = std_normal_2d();
        assert!(matches!(g.logpdf(&[0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(g.score(&[0.0, 1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn invalid_mixtures_are_rejected() {
        assert!(GaussianMixture::isotropic(vec![vec![0.0]], 0.0, vec![1.0]).is_err());
        assert!(GaussianMixture::isotropic(vec![vec![0.0], vec![1.0]], 1.0, vec![0.5, 0.6]).is_err());
        assert!(GaussianMixture::new(vec![vec![0.0], vec![1.0, 2.0]], vec![vec![1.0], vec![1.0, 1.0]], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn perturbed_endpoints() {
        let g = GaussianMixture::three_mode();
        let tiny = g.perturbed(1e-300).unwrap();
        assert_eq!(tiny, g);
        let full = g.perturbed(1.0).unwrap();
        for k in 0..3 {
            assert!(full.means()[k].iter().all(|m| *m == 0.0));
            assert!(full.variances()[k].iter().all(|v| *v == 1.0));
        }
        assert!(g.perturbed(0.0).is_err());
        assert!(g.perturbed(1.5).is_err());
    }

    #[test]
    fn perturbed_half_matches_forward_samples() {
        let (mu, var) = (1.4, 0.3);
        let g = GaussianMixture::uniform(vec![vec![mu]], var).unwrap();
        let p = g.perturbed(0.5).unwrap();
        assert!((p.means()[0][0] - 0.5f64.sqrt() * mu).abs() < 1e-15);
        assert!((p.variances()[0][0] - (0.5 * var + 0.5)).abs() < 1e-15);

        // KS statistic of forward samples against the closed-form law.
        let mut rng = stream(5);
        let n = 10_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| {
                let x0 = mu + var.sqrt() * standard_normal(&mut rng);
                0.5f64.sqrt() * x0 + 0.5f64.sqrt() * standard_normal(&mut rng)
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        let (m, s) = (p.means()[0][0], p.variances()[0][0].sqrt());
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = normal_cdf((x - m) / s);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "ks = {ks}");
    }

    fn normal_cdf(z: f64) -> f64 {
        // Abramowitz-Stegun 7.1.26 erf, absolute error < 1.5e-7.
        let x = z / std::f64::consts::SQRT_2;
        let t = 1.0 / (1.0 + 0.327_591_1 * x.abs());
        let y = 1.0
            - (((((1.061_405_429 * t - 1.453_152_027) * t) + 1.421_413_741) * t - 0.284_496_736) * t
                + 0.254_829_592)
                * t
                * (-x * x).exp();
        0.5 * (1.0 + y.copysign(x))
    }

    #[test]
    fn mahalanobis_and_nearest() {
        let g = GaussianMixture::three_mode();
        let (k, m) = g.nearest_component(&[0.0, -5.0 + 0.1f64.sqrt()]).unwrap();
        assert_eq!(k, 1);
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = GaussianMixture::three_mode();
        let back = GaussianMixture::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(g, back);
        let bad = r#"{"means":[[0.0]],"variances":[[-1.0]],"weights":[1.0]}"#;
        assert!(GaussianMixture::from_json(bad).is_err());
    }

    #[test]
    fn standardized_maps_means_and_variances() {
        let g = GaussianMixture::three_mode();
        let z = g.standardized(&[-10.0 / 3.0, -10.0 / 3.0], &[2.0, 2.0]).unwrap();
        assert!((z.means()[0][0] - (-5.0 + 10.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!((z.variances()[0][0] - 0.025).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn perturbations_compose(a1 in 0.01f64..0.99, a2 in 0.01f64..0.99) {
            let g = GaussianMixture::new(
                vec![vec![-5.0, 3.0], vec![2.0, -1.0]],
                vec![vec![0.1, 0.4], vec![2.0, 0.7]],
                vec![0.3, 0.7],
            ).unwrap();
            let two = g.perturbed(a1).unwrap().perturbed(a2).unwrap();
            let one = g.perturbed(1.0 - (1.0 - a1) * (1.0 - a2)).unwrap();
            for k in 0..2 {
                for j in 0..2 {
                    prop_assert!((two.means()[k][j] - one.means()[k][j]).abs() < 1e-12);
                    prop_assert!((two.variances()[k][j] - one.variances()[k][j]).abs() < 1e-12);
                }
            }
            prop_assert_eq!(two.weights(), one.weights());
        }

        #[test]
        fn score_is_finite_far_away(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            let s = GaussianMixture::three_mode().score(&[x, y]).unwrap();
            prop_assert!(s.iter().all(|v| v.is_finite()));
        }
    }
}
