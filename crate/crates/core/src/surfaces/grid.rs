//! Regular 1-D/2-D grids of a scalar field and their finite-difference operators.
//!
//! Axis 0 is `x`, axis 1 is `y`; storage is row-major with the `y` index
//! varying fastest, so `values[i * ny + j]` sits at
//! `(origin[0] + i·h0, origin[1] + j·h1)`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Gradient-normalization regularizer shared by all curvature maps.
pub const DEFAULT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldGrid {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl ScalarFieldGrid {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let d = shape.len();
        if !(1..=2).contains(&d) {
            return Err(Error::invalid("shape", format!("grids are 1-D or 2-D, got {d}-D")));
        }
        if origin.len() != d || spacing.len() != d {
            return Err(Error::invalid("origin/spacing", "length must match the grid dimension"));
        }
        if spacing.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::invalid("spacing", "entries must be finite and > 0"));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::invalid("origin", "entries must be finite"));
        }
        let n: usize = shape.iter().product();
        if n == 0 || values.len() != n {
            return Err(Error::invalid(
                "values",
                format!("expected {n} values for shape {shape:?}, got {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid values".into()));
        }
        Ok(Self {
            origin,
            spacing,
            shape,
            values,
        })
    }

    /// Samples `f(x, y)` on `nx × ny` nodes starting at `origin`.
    pub fn from_fn_2d(
        origin: [f64; 2],
        spacing: [f64; 2],
        shape: [usize; 2],
        f: impl Fn(f64, f64) -> f64 + Sync,
    ) -> Result<Self> {
        let [nx, ny] = shape;
        let values: Vec<f64> = (0..nx * ny)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / ny, idx % ny);
                f(origin[0] + i as f64 * spacing[0], origin[1] + j as f64 * spacing[1])
            })
            .collect();
        Self::new(origin.to_vec(), spacing.to_vec(), shape.to_vec(), values)
    }

    /// Square domain `[lo, hi]²` with nodes at both ends.
    pub fn square(lo: f64, hi: f64, spacing: f64, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        let n = ((hi - lo) / spacing).round() as usize + 1;
        Self::from_fn_2d([lo, lo], [spacing, spacing], [n, n], f)
    }

    pub fn from_fn_1d(origin: f64, spacing: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n).map(|i| f(origin + i as f64 * spacing)).collect();
        Self::new(vec![origin], vec![spacing], vec![n], values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same geometry, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.origin.clone(), self.spacing.clone(), self.shape.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|v| f(*v)).collect())
    }

    fn ny(&self) -> usize {
        if self.dim() == 2 {
            self.shape[1]
        } else {
            1
        }
    }

    /// Value at node `(i, j)`; `j` is ignored for 1-D grids.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny() + j]
    }

    /// Coordinates of flat index `idx`.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let ny = self.ny();
        let ij = [idx / ny, idx % ny];
        (0..self.dim())
            .map(|a| self.origin[a] + ij[a] as f64 * self.spacing[a])
            .collect()
    }

    /// Area (or length) element `Π h_a`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Riemann sum `Σ f · Π h_a`.
    pub fn integral(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.values) * self.cell_volume()
    }

    /// Extent `[lo, hi]` along axis `a`.
    pub fn extent(&self, a: usize) -> (f64, f64) {
        let lo = self.origin[a];
        (lo, lo + (self.shape[a] - 1) as f64 * self.spacing[a])
    }

    /// Linear (1-D) or bilinear (2-D) interpolation, clamped to the grid.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let locate = |a: usize| -> (usize, f64) {
            let n = self.shape[a];
            let t = ((x[a] - self.origin[a]) / self.spacing[a]).clamp(0.0, (n - 1) as f64);
            let i = (t.floor() as usize).min(n.saturating_sub(2));
            (i, t - i as f64)
        };
        if self.dim() == 1 {
            if self.shape[0] == 1 {
                return self.values[0];
            }
            let (i, f) = locate(0);
            return self.values[i] * (1.0 - f) + self.values[i + 1] * f;
        }
        if self.shape[0] < 2 || self.shape[1] < 2 {
            return self.values[0];
        }
        let (i, fx) = locate(0);
        let (j, fy) = locate(1);
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (v00 * (1.0 - fx) + v10 * fx) * (1.0 - fy) + (v01 * (1.0 - fx) + v11 * fx) * fy
    }

    /// Indices of strict local maxima over the 8-neighborhood (interior nodes only).
    pub fn local_maxima(&self) -> Vec<usize> {
        if self.dim() != 2 {
            return Vec::new();
        }
        let (nx, ny) = (self.shape[0], self.shape[1]);
        let mut out = Vec::new();
        for i in 1..nx.saturating_sub(1) {
            for j in 1..ny.saturating_sub(1) {
                let v = self.at(i, j);
                let strict = (-1i64..=1).all(|di| {
                    (-1i64..=1).all(|dj| {
                        (di == 0 && dj == 0)
                            || v > self.at((i as i64 + di) as usize, (j as i64 + dj) as usize)
                    })
                });
                if strict {
                    out.push(i * ny + j);
                }
            }
        }
        out
    }

    /// Serializes as a commented header line followed by one line per axis-0 index.
    pub fn to_csv(&self) -> String {
        let join = |xs: &[String]| xs.join(";");
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# origin={} spacing={} shape={}",
            join(&self.origin.iter().map(f64::to_string).collect::<Vec<_>>()),
            join(&self.spacing.iter().map(f64::to_string).collect::<Vec<_>>()),
            join(&self.shape.iter().map(usize::to_string).collect::<Vec<_>>()),
        );
        let ny = self.ny();
        for row in self.values.chunks(ny) {
            let line: Vec<String> = row.iter().map(f64::to_string).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("grid header must start with '#'".into()))?;
        let (mut origin, mut spacing, mut shape) = (None, None, None);
        for field in header.split_whitespace() {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
            let floats = || -> Result<Vec<f64>> {
                val.split(';')
                    .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{key}: {e}"))))
                    .collect()
            };
            match key {
                "origin" => origin = Some(floats()?),
                "spacing" => spacing = Some(floats()?),
                "shape" => {
                    shape = Some(
                        val.split(';')
                            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("shape: {e}"))))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                other => return Err(Error::Parse(format!("unknown header key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("grid header lacks `{k}`"));
        let origin = origin.ok_or_else(|| missing("origin"))?;
        let spacing = spacing.ok_or_else(|| missing("spacing"))?;
        let shape = shape.ok_or_else(|| missing("shape"))?;
        let mut values = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            for tok in line.split(',') {
                values.push(
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("grid value `{tok}`: {e}")))?,
                );
            }
        }
        Self::new(origin, spacing, shape, values)
    }
}

/// Per-axis gradient components sharing the source grid's geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub components: Vec<ScalarFieldGrid>,
}

impl GradientField {
    pub fn magnitude(&self) -> ScalarFieldGrid {
        let n = self.components[0].len();
        let vals = (0..n)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.values[i] * c.values[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        self.components[0]
            .with_values(vals)
            .expect("magnitude of a finite field is finite")
    }

    /// Interpolated gradient at `x`.
    pub fn sample(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.interpolate(x)).collect()
    }
}

/// First derivative along one axis: central inside, one-sided first-order at the borders.
fn diff_axis(values: &[f64], shape: &[usize], h: f64, axis: usize) -> Vec<f64> {
    let (nx, ny) = if shape.len() == 2 { (shape[0], shape[1]) } else { (shape[0], 1) };
    let (n_axis, stride) = if axis == 0 { (nx, ny) } else { (ny, 1) };
    (0..values.len())
        .into_par_iter()
        .map(|idx| {
            let k = if axis == 0 { idx / ny } else { idx % ny };
            if k == 0 {
                (values[idx + stride] - values[idx]) / h
            } else if k == n_axis - 1 {
                (values[idx] - values[idx - stride]) / h
            } else {
                (values[idx + stride] - values[idx - stride]) / (2.0 * h)
            }
        })
        .collect()
}

fn require_min_points(grid: &ScalarFieldGrid) -> Result<()> {
    if grid.shape.iter().any(|n| *n < 3) {
        return Err(Error::GridTooSmall(format!(
            "need at least 3 points per axis, shape is {:?}",
            grid.shape
        )));
    }
    Ok(())
}

pub fn grid_gradient(grid: &ScalarFieldGrid) -> Result<GradientField> {
    require_min_points(grid)?;
    let components = (0..grid.dim())
        .map(|a| {
            grid.with_values(diff_axis(&grid.values, &grid.shape, grid.spacing[a], a))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientField { components })
}

/// `−∇·(∇f / (‖∇f‖ + eps))` on a 2-D grid.
pub fn grid_tv_curvature(grid: &ScalarFieldGrid, eps: f64) -> Result<ScalarFieldGrid> {
    if grid.dim() != 2 {
        return Err(Error::invalid("grid", "curvature needs a 2-D grid"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", "must be > 0"));
    }
    let g = grid_gradient(grid)?;
    let (gx, gy) = (&g.components[0].values, &g.components[1].values);
    let norm: Vec<f64> = gx.iter().zip(gy).map(|(a, b)| (a * a + b * b).sqrt() + eps).collect();
    let nx: Vec<f64> = gx.iter().zip(&norm).map(|(a, n)| a / n).collect();
    let ny: Vec<f64> = gy.iter().zip(&norm).map(|(b, n)| b / n).collect();
    let dnx = diff_axis(&nx, &grid.shape, grid.spacing[0], 0);
    let dny = diff_axis(&ny, &grid.shape, grid.spacing[1], 1);
    grid.with_values(dnx.iter().zip(&dny).map(|(a, b)| -(a + b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior(g: &ScalarFieldGrid) -> impl Iterator<Item = usize> + '_ {
        let (nx, ny) = (g.shape()[0], g.shape()[1]);
        (0..nx * ny).filter(move |idx| {
            let (i, j) = (idx / ny, idx % ny);
            i > 0 && j > 0 && i < nx - 1 && j < ny - 1
        })
    }

    #[test]
    fn gradient_of_ramp_is_exact() {
        let g = ScalarFieldGrid::square(-1.0, 1.0, 0.1, |x, _| 3.0 * x).unwrap();
        let grad = grid_gradient(&g).unwrap();
        for idx in 0..g.len() {
            assert!((grad.components[0].values()[idx] - 3.0).abs() < 1e-12);
            assert!(grad.components[1].values()[idx].abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = ScalarFieldGrid::square(0.0, 1.0, 0.25, |_, _| 4.2).unwrap();
        let grad = grid_gradient(&g).unwrap();
        assert!(grad.magnitude().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gradient_of_quadratic_is_exact_inside() {
        let g = ScalarFieldGrid::square(-1.0, 1.0, 0.1, |x, y| x * x + y * y).unwrap();
        let grad = grid_gradient(&g).unwrap();
        for idx in interior(&g) {
            let c = g.coords(idx);
            assert!((grad.components[0].values()[idx] - 2.0 * c[0]).abs() < 1e-10);
            assert!((grad.components[1].values()[idx] - 2.0 * c[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_needs_three_points() {
        let g = ScalarFieldGrid::from_fn_2d([0.0, 0.0], [1.0, 1.0], [2, 5], |x, _| x).unwrap();
        assert!(matches!(grid_gradient(&g), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn gradient_1d_borders_are_one_sided() {
        let g = ScalarFieldGrid::from_fn_1d(0.0, 1.0, 4, |x| x * x).unwrap();
        let d = grid_gradient(&g).unwrap();
        assert_eq!(d.components[0].values(), &[1.0, 2.0, 4.0, 5.0]);
    }

    #[test]
    fn curvature_of_affine_is_zero() {
        let g = ScalarFieldGrid::square(-1.0, 1.0, 0.05, |x, y| 2.0 * x - y + 1.0).unwrap();
        let k = grid_tv_curvature(&g, DEFAULT_EPS).unwrap();
        for idx in interior(&g) {
            assert!(k.values()[idx].abs() < 1e-9);
        }
    }

    #[test]
    fn curvature_of_radial_hill_and_bowl() {
        let h = 0.01;
        let hill = ScalarFieldGrid::square(-1.0, 1.0, h, |x, y| -(x * x + y * y)).unwrap();
        let bowl = ScalarFieldGrid::square(-1.0, 1.0, h, |x, y| x * x + y * y).unwrap();
        let kh = grid_tv_curvature(&hill, DEFAULT_EPS).unwrap();
        let kb = grid_tv_curvature(&bowl, DEFAULT_EPS).unwrap();
        for idx in interior(&hill) {
            let c = hill.coords(idx);
            let r = (c[0] * c[0] + c[1] * c[1]).sqrt();
            if r >= 5.0 * h && r < 0.95 {
                assert!((kh.values()[idx] - 1.0 / r).abs() < 0.05 / r, "r={r} k={}", kh.values()[idx]);
                assert!((kb.values()[idx] + 1.0 / r).abs() < 0.05 / r);
            }
        }
    }

    #[test]
    fn curvature_is_antisymmetric() {
        let f = |x: f64, y: f64| (1.3 * x).sin() * (0.7 * y).cos() + 0.2 * x * y;
        let g = ScalarFieldGrid::square(-2.0, 2.0, 0.05, f).unwrap();
        let ng = g.map(|v| -v).unwrap();
        let a = grid_tv_curvature(&g, DEFAULT_EPS).unwrap();
        let b = grid_tv_curvature(&ng, DEFAULT_EPS).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn interpolation_reproduces_bilinear_fields() {
        let g = ScalarFieldGrid::square(-1.0, 1.0, 0.1, |x, y| 1.0 + 2.0 * x - y + 0.5 * x * y).unwrap();
        for &(x, y) in &[(0.03, -0.77), (0.5, 0.5), (-0.99, 0.99)] {
            let v = g.interpolate(&[x, y]);
            assert!((v - (1.0 + 2.0 * x - y + 0.5 * x * y)).abs() < 1e-12);
        }
        // Clamped outside.
        assert!((g.interpolate(&[5.0, 0.0]) - g.interpolate(&[1.0, 0.0])).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let g = ScalarFieldGrid::from_fn_2d([-0.3, 1.0 / 3.0], [0.1, 0.07], [5, 4], |x, y| (x * 7.1).sin() / (1.0 + y))
            .unwrap();
        let back = ScalarFieldGrid::from_csv(&g.to_csv()).unwrap();
        assert_eq!(g, back);
        let g1 = ScalarFieldGrid::from_fn_1d(0.5, 0.25, 6, |x| x.exp()).unwrap();
        assert_eq!(ScalarFieldGrid::from_csv(&g1.to_csv()).unwrap(), g1);
    }

    #[test]
    fn csv_header_format() {
        let g = ScalarFieldGrid::from_fn_2d([0.0, -1.5], [0.5, 0.25], [3, 2], |x, y| x + y).unwrap();
        let csv = g.to_csv();
        assert!(csv.starts_with("# origin=0;-1.5 spacing=0.5;0.25 shape=3;2\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(ScalarFieldGrid::new(vec![0.0], vec![0.0], vec![3], vec![1.0; 3]).is_err());
        assert!(ScalarFieldGrid::new(vec![0.0], vec![1.0], vec![3], vec![1.0; 2]).is_err());
        assert!(ScalarFieldGrid::new(vec![0.0], vec![1.0], vec![2], vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn local_maxima_finds_isolated_peaks() {
        let g = ScalarFieldGrid::square(-2.0, 2.0, 0.1, |x, y| {
            (-(x - 1.0).powi(2) - y * y).exp() + (-(x + 1.0).powi(2) - y * y).exp()
        })
        .unwrap();
        let peaks = g.local_maxima();
        assert_eq!(peaks.len(), 2);
    }
}
