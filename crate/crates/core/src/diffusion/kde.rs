//! Gaussian kernel density estimation on a 2-D grid, with mean-shift mode refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surfaces::ScalarFieldGrid;

pub const DEFAULT_BANDWIDTH: f64 = 0.3;

/// Axis-aligned node lattice `[lo, hi]` with equal spacing on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub spacing: f64,
}

impl GridSpec {
    pub fn square(lo: f64, hi: f64, spacing: f64) -> Self {
        Self {
            lo: [lo, lo],
            hi: [hi, hi],
            spacing,
        }
    }

    /// Bounding box of `points` padded by `pad` on every side.
    pub fn covering(points: &[Vec<f64>], pad: f64, spacing: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("points"));
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            crate::error::check_dim(2, p.len())?;
            for a in 0..2 {
                lo[a] = lo[a].min(p[a] - pad);
                hi[a] = hi[a].max(p[a] + pad);
            }
        }
        Ok(Self { lo, hi, spacing })
    }

    fn shape(&self) -> Result<[usize; 2]> {
        if !(self.spacing > 0.0) || (0..2).any(|a| !(self.hi[a] > self.lo[a])) {
            return Err(Error::invalid("grid", "need spacing > 0 and hi > lo on both axes"));
        }
        Ok([0, 1].map(|a| ((self.hi[a] - self.lo[a]) / self.spacing).round() as usize + 1))
    }
}

fn check_samples(samples: &[Vec<f64>], bandwidth: f64) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::invalid("bandwidth", "must be > 0"));
    }
    samples.iter().try_for_each(|s| crate::error::check_dim(2, s.len()))
}

/// Isotropic Gaussian KDE evaluated on the grid and rescaled to unit quadrature mass.
pub fn kde(samples: &[Vec<f64>], bandwidth: f64, grid: &GridSpec) -> Result<ScalarFieldGrid> {
    check_samples(samples, bandwidth)?;
    let shape = grid.shape()?;
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    let raw = ScalarFieldGrid::from_fn_2d(grid.lo, [grid.spacing; 2], shape, |x, y| {
        let terms: Vec<f64> = samples
            .iter()
            .map(|s| (-((x - s[0]).powi(2) + (y - s[1]).powi(2)) * inv).exp())
            .collect();
        crate::numeric::pairwise_sum(&terms)
    })?;
    let mass = raw.integral();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::NonFinite("KDE mass is zero on the grid; widen the grid".into()));
    }
    raw.map(|v| v / mass)
}

/// A density peak: refined location and grid density at its seed node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeMode {
    pub point: Vec<f64>,
    pub grid_point: Vec<f64>,
    pub density: f64,
}

/// Fixed point of the Gaussian mean-shift map starting at `start`.
pub fn mean_shift(samples: &[Vec<f64>], bandwidth: f64, start: &[f64]) -> Vec<f64> {
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut x = start.to_vec();
    for _ in 0..1000 {
        let logw: Vec<f64> = samples
            .iter()
            .map(|s| -((x[0] - s[0]).powi(2) + (x[1] - s[1]).powi(2)) * inv)
            .collect();
        let m = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|l| (l - m).exp()).collect();
        let total = crate::numeric::pairwise_sum(&w);
        let next: Vec<f64> = (0..2)
            .map(|a| {
                let terms: Vec<f64> = w.iter().zip(samples).map(|(wi, s)| wi * s[a]).collect();
                crate::numeric::pairwise_sum(&terms) / total
            })
            .collect();
        let step = ((next[0] - x[0]).powi(2) + (next[1] - x[1]).powi(2)).sqrt();
        x = next;
        if step < 1e-10 {
            break;
        }
    }
    x
}

/// The `top` highest strict grid maxima of the KDE, each refined by mean-shift.
pub fn kde_modes(samples: &[Vec<f64>], bandwidth: f64, grid: &GridSpec, top: usize) -> Result<Vec<KdeMode>> {
    let density = kde(samples, bandwidth, grid)?;
    let mut peaks = density.local_maxima();
    peaks.sort_by(|&a, &b| density.values()[b].total_cmp(&density.values()[a]).then(a.cmp(&b)));
    peaks.truncate(top);
    Ok(peaks
        .into_iter()
        .map(|idx| {
            let grid_point = density.coords(idx);
            KdeMode {
                point: mean_shift(samples, bandwidth, &grid_point),
                grid_point,
                density: density.values()[idx],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::surfaces::GaussianMixture;

    #[test]
    fn single_sample_peaks_at_the_sample() {
        let g = kde(&[vec![0.0, 0.0]], 0.5, &GridSpec::square(-3.0, 3.0, 0.1)).unwrap();
        let (argmax, _) = g
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let p = g.coords(argmax);
        assert!(p[0].abs() < 1e-9 && p[1].abs() < 1e-9);
        // Proportional to the Gaussian kernel.
        let ratio = g.interpolate(&[0.5, 0.0]) / g.interpolate(&[0.0, 0.0]);
        assert!((ratio - (-0.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn unit_mass() {
        let mut rng = stream(1);
        let pts = GaussianMixture::three_mode().sample_n(&mut rng, 200);
        let h = 0.3;
        let spec = GridSpec::covering(&pts, 6.0 * h, 0.05).unwrap();
        let g = kde(&pts, h, &spec).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = GridSpec::square(-1.0, 1.0, 0.1);
        assert!(kde(&[], 0.3, &spec).is_err());
        assert!(kde(&[vec![0.0, 0.0]], 0.0, &spec).is_err());
        assert!(kde(&[vec![0.0, 0.0, 0.0]], 0.3, &spec).is_err());
    }

    #[test]
    fn modes_of_true_samples_sit_on_the_means() {
        let gmm = GaussianMixture::three_mode();
        let pts = gmm.sample_n(&mut stream(2), 1000);
        let modes = kde_modes(&pts, DEFAULT_BANDWIDTH, &GridSpec::square(-8.0, 3.0, 0.1), 3).unwrap();
        assert_eq!(modes.len(), 3);
        let mut hit = [false; 3];
        for m in &modes {
            let (k, dist) = gmm.nearest_component(&m.point).unwrap();
            assert!(dist < 2.45);
            hit[k] = true;
        }
        assert!(hit.iter().all(|h| *h));
    }
}
