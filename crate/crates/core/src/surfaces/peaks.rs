//! The normalized, floored "peaks" test surface.
//!
//! `g(x, y) = 3(1−x)² e^{−x²−(y+1)²} − 10(x/5 − x³ − y⁵) e^{−x²−y²} − ⅓ e^{−(x+1)²−y²}`
//!
//! `f = g / C`, with values below the floor set to exactly zero. `C` is fixed
//! so that the Riemann sum of the floored `f` over `[−3, 3]²` at spacing 0.01
//! equals one.
//!
//! With the formula read literally, `(1.2, 0.8)` lies next to a saddle and
//! `(−0.475, −0.7)` next to a maximum. The interest points used by the
//! curvature experiments, a maximum at `(1.2, 0.8)` and a saddle at
//! `(−0.475, −0.7)`, hold for the surface mirrored in `y`. That mirrored
//! orientation is the default; [`Orientation::AsWritten`] keeps the literal
//! formula.

use serde::{Deserialize, Serialize};

use super::grid::ScalarFieldGrid;
use crate::error::Result;

pub const DOMAIN: (f64, f64) = (-3.0, 3.0);
pub const DOMAIN_SPACING: f64 = 0.01;
pub const DEFAULT_FLOOR: f64 = 1e-5;

/// Interest points of the two-point experiment: a local maximum and a saddle.
pub const MAXIMUM: [f64; 2] = [1.2, 0.8];
pub const SADDLE: [f64; 2] = [-0.475, -0.7];

/// Critical points of the mirrored surface: maxima first, then saddles.
pub const FIVE_POINTS: [([f64; 2], CriticalKind); 5] = [
    ([-0.46, 0.6292], CriticalKind::Maximum),
    ([-0.0093, -1.5814], CriticalKind::Maximum),
    ([1.2857, 0.0048], CriticalKind::Maximum),
    ([-0.2659, -0.4667], CriticalKind::Saddle),
    ([1.0983, -0.8545], CriticalKind::Saddle),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Maximum,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `f(x, y) = g(x, −y) / C`.
    #[default]
    Mirrored,
    /// `f(x, y) = g(x, y) / C`.
    AsWritten,
}

/// Unnormalized three-term formula.
pub fn peaks_raw(x: f64, y: f64) -> f64 {
    3.0 * (1.0 - x).powi(2) * (-x * x - (y + 1.0).powi(2)).exp()
        - 10.0 * (x / 5.0 - x.powi(3) - y.powi(5)) * (-x * x - y * y).exp()
        - (1.0 / 3.0) * (-(x + 1.0).powi(2) - y * y).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeaksFunction {
    c: f64,
    floor: f64,
    orientation: Orientation,
}

impl Default for PeaksFunction {
    fn default() -> Self {
        Self::new(DEFAULT_FLOOR, Orientation::Mirrored)
    }
}

impl PeaksFunction {
    /// Fixes `C` so that the floored, normalized surface has unit mass on the domain.
    pub fn new(floor: f64, orientation: Orientation) -> Self {
        let (lo, hi) = DOMAIN;
        let n = ((hi - lo) / DOMAIN_SPACING).round() as usize + 1;
        let h2 = DOMAIN_SPACING * DOMAIN_SPACING;
        let mut raw = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let x = lo + i as f64 * DOMAIN_SPACING;
                let y = lo + j as f64 * DOMAIN_SPACING;
                raw.push(match orientation {
                    Orientation::Mirrored => peaks_raw(x, -y),
                    Orientation::AsWritten => peaks_raw(x, y),
                });
            }
        }
        // Flooring depends on C, so iterate C = h² Σ_{g/C ≥ floor} g to its fixed point.
        let mass = |c: f64| -> f64 {
            let kept: Vec<f64> = raw.iter().copied().filter(|g| g / c >= floor).collect();
            crate::numeric::pairwise_sum(&kept) * h2
        };
        let mut c = crate::numeric::pairwise_sum(
            &raw.iter().map(|g| g.max(0.0)).collect::<Vec<_>>(),
        ) * h2;
        for _ in 0..64 {
            let next = mass(c);
            if next == c {
                break;
            }
            c = next;
        }
        Self {
            c,
            floor,
            orientation,
        }
    }

    pub fn normalization(&self) -> f64 {
        self.c
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Normalized value before flooring (may be negative).
    pub fn unfloored(&self, x: f64, y: f64) -> f64 {
        let y = match self.orientation {
            Orientation::Mirrored => -y,
            Orientation::AsWritten => y,
        };
        peaks_raw(x, y) / self.c
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let v = self.unfloored(x, y);
        if v < self.floor {
            0.0
        } else {
            v
        }
    }

    /// Floored surface sampled on `[lo, hi]²`.
    pub fn grid(&self, lo: f64, hi: f64, spacing: f64) -> Result<ScalarFieldGrid> {
        ScalarFieldGrid::square(lo, hi, spacing, |x, y| self.eval(x, y))
    }

    /// Floored surface on the normalization domain.
    pub fn domain_grid(&self) -> Result<ScalarFieldGrid> {
        self.grid(DOMAIN.0, DOMAIN.1, DOMAIN_SPACING)
    }
}

pub fn peaks_eval(p: &PeaksFunction, x: f64, y: f64) -> f64 {
    p.eval(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_field_is_floored() {
        let p = PeaksFunction::default();
        assert_eq!(p.eval(10.0, 10.0), 0.0);
        assert_eq!(p.eval(-10.0, 3.0), 0.0);
    }

    #[test]
    fn unit_mass_on_domain() {
        for o in [Orientation::Mirrored, Orientation::AsWritten] {
            let p = PeaksFunction::new(DEFAULT_FLOOR, o);
            let m = p.domain_grid().unwrap().integral();
            assert!((m - 1.0).abs() < 1e-3, "{o:?}: mass {m}");
        }
    }

    #[test]
    fn nonnegative_everywhere() {
        let p = PeaksFunction::default();
        let g = p.grid(-4.0, 4.0, 0.05).unwrap();
        assert!(g.values().iter().all(|v| *v >= 0.0));
        assert!(g.values().iter().all(|v| *v == 0.0 || *v >= DEFAULT_FLOOR));
    }

    #[test]
    fn maximum_exceeds_saddle() {
        let p = PeaksFunction::default();
        let (a, b) = (p.eval(MAXIMUM[0], MAXIMUM[1]), p.eval(SADDLE[0], SADDLE[1]));
        assert!(a > b && b > 0.0, "{a} {b}");
    }

    #[test]
    fn literal_orientation_swaps_the_roles() {
        let p = PeaksFunction::new(DEFAULT_FLOOR, Orientation::AsWritten);
        assert!(p.eval(MAXIMUM[0], MAXIMUM[1]) < p.eval(SADDLE[0], SADDLE[1]));
    }

    #[test]
    fn mirrored_is_reflection_of_literal() {
        let m = PeaksFunction::default();
        let a = PeaksFunction::new(DEFAULT_FLOOR, Orientation::AsWritten);
        assert_eq!(m.normalization(), a.normalization());
        assert_eq!(m.eval(0.3, -1.1), a.eval(0.3, 1.1));
    }

    fn fd_grad(p: &PeaksFunction, x: f64, y: f64) -> [f64; 2] {
        let h = 1e-6;
        [
            (p.unfloored(x + h, y) - p.unfloored(x - h, y)) / (2.0 * h),
            (p.unfloored(x, y + h) - p.unfloored(x, y - h)) / (2.0 * h),
        ]
    }

    fn hessian_det(p: &PeaksFunction, x: f64, y: f64) -> (f64, f64) {
        let h = 1e-4;
        let f = |a: f64, b: f64| p.unfloored(a, b);
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        (fxx * fyy - fxy * fxy, fxx)
    }

    #[test]
    fn five_point_table_lists_critical_points() {
        let p = PeaksFunction::default();
        let scale = p.normalization();
        for (pt, kind) in FIVE_POINTS {
            let g = fd_grad(&p, pt[0], pt[1]);
            // Tabulated to 4 decimals: raw gradient stays within the rounding slack.
            assert!(g[0].hypot(g[1]) * scale < 5e-3, "{pt:?}: {g:?}");
            let (det, fxx) = hessian_det(&p, pt[0], pt[1]);
            match kind {
                CriticalKind::Maximum => assert!(det > 0.0 && fxx < 0.0, "{pt:?}"),
                CriticalKind::Saddle => assert!(det < 0.0, "{pt:?}"),
            }
        }
    }
}
