//! Potentials on [0, 1]: uniform-grid samples, trigonometric coefficients
//! and the quadratures shared by the rest of the crate.
//!
//! Fourier coefficients are stored raw: `a_n = ∫ v cos 2πnx`, `b_n = ∫ v sin 2πnx`,
//! and synthesis is `a0 + 2 Σ a_n cos 2πnx + 2 Σ b_n sin 2πnx`. Any sign flip
//! used by the reconstruction maps is applied in [`crate::inverse`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of subintervals.
pub const MIN_GRID: usize = 16;

/// Real function sampled at `x_i = i / n_grid`, `i = 0..=n_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let n_grid = samples.len().saturating_sub(1);
        check_grid(n_grid)?;
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample {i} is not finite"
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(n_grid: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(n_grid)?;
        let h = 1.0 / n_grid as f64;
        Self::new((0..=n_grid).map(|i| f(i as f64 * h)).collect())
    }

    pub fn constant(n_grid: usize, c: f64) -> Result<Self> {
        Self::from_fn(n_grid, |_| c)
    }

    pub fn zeros(n_grid: usize) -> Result<Self> {
        Self::constant(n_grid, 0.0)
    }

    pub fn n_grid(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n_grid() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n_grid() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// `∫₀¹ v` by composite Simpson.
    pub fn integral(&self) -> f64 {
        simpson(&self.samples)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            samples: self.samples.iter().map(|&s| f(s)).collect(),
        }
    }

    pub fn add_constant(&self, c: f64) -> GridFunction {
        self.map(|s| s + c)
    }

    /// Pointwise difference; both operands must share the grid.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        Ok(GridFunction {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Max-norm distance to another function on the same grid.
    pub fn max_distance(&self, other: &GridFunction) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// L² distance to another function on the same grid.
    pub fn l2_distance(&self, other: &GridFunction) -> Result<f64> {
        lp_norm(&self.sub(other)?, 2.0)
    }

    fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.n_grid() != other.n_grid() {
            return Err(Error::InvalidArgument(format!(
                "grid mismatch: {} vs {} subintervals",
                self.n_grid(),
                other.n_grid()
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_grid(n_grid: usize) -> Result<()> {
    if n_grid < MIN_GRID || !n_grid.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "n_grid must be even and >= {MIN_GRID}, got {n_grid}"
        )));
    }
    Ok(())
}

/// Truncated trigonometric series: mean, cosine and sine coefficients of orders 1..=N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    pub a0: f64,
    #[serde(rename = "cos")]
    cos_coeffs: Vec<f64>,
    #[serde(rename = "sin")]
    sin_coeffs: Vec<f64>,
}

impl TrigSeries {
    pub fn new(a0: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Result<Self> {
        if cos_coeffs.len() != sin_coeffs.len() {
            return Err(Error::InvalidArgument(format!(
                "cos/sin length mismatch: {} vs {}",
                cos_coeffs.len(),
                sin_coeffs.len()
            )));
        }
        let finite = a0.is_finite()
            && cos_coeffs.iter().chain(&sin_coeffs).all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidArgument(
                "trigonometric coefficients must be finite".into(),
            ));
        }
        Ok(Self {
            a0,
            cos_coeffs,
            sin_coeffs,
        })
    }

    /// Cosine-only series.
    pub fn even(a0: f64, cos_coeffs: Vec<f64>) -> Result<Self> {
        let n = cos_coeffs.len();
        Self::new(a0, cos_coeffs, vec![0.0; n])
    }

    pub fn order(&self) -> usize {
        self.cos_coeffs.len()
    }

    /// `a_n` for `n = 1..=N` (index 0 holds `a_1`).
    pub fn cos(&self) -> &[f64] {
        &self.cos_coeffs
    }

    /// `b_n` for `n = 1..=N` (index 0 holds `b_1`).
    pub fn sin(&self) -> &[f64] {
        &self.sin_coeffs
    }

    /// Largest absolute coefficient difference; missing orders count as zero.
    pub fn max_change(&self, other: &TrigSeries) -> f64 {
        let n = self.order().max(other.order());
        let get = |s: &[f64], i: usize| s.get(i).copied().unwrap_or(0.0);
        let mut m = (self.a0 - other.a0).abs();
        for i in 0..n {
            m = m.max((get(&self.cos_coeffs, i) - get(&other.cos_coeffs, i)).abs());
            m = m.max((get(&self.sin_coeffs, i) - get(&other.sin_coeffs, i)).abs());
        }
        m
    }
}

/// Raw Fourier coefficients of `v` up to order `order` by Simpson quadrature.
pub fn fourier_analyze(v: &GridFunction, order: usize) -> Result<TrigSeries> {
    let n_grid = v.n_grid();
    if order > n_grid / 4 {
        return Err(Error::InvalidArgument(format!(
            "order {order} exceeds the resolution limit n_grid/4 = {}",
            n_grid / 4
        )));
    }
    let s = v.samples();
    let weights = simpson_weights(n_grid);
    let h = v.step();
    let mut cos_coeffs = Vec::with_capacity(order);
    let mut sin_coeffs = Vec::with_capacity(order);
    for n in 1..=order {
        let k = 2.0 * PI * n as f64;
        let (mut c, mut si) = (0.0, 0.0);
        for (i, (&w, &vi)) in weights.iter().zip(s).enumerate() {
            let (sn, cs) = (k * i as f64 * h).sin_cos();
            c += w * vi * cs;
            si += w * vi * sn;
        }
        cos_coeffs.push(c);
        sin_coeffs.push(si);
    }
    TrigSeries::new(v.integral(), cos_coeffs, sin_coeffs)
}

/// Samples `a0 + 2 Σ a_n cos 2πnx + 2 Σ b_n sin 2πnx` on a grid of `n_grid` subintervals.
pub fn fourier_synthesize(series: &TrigSeries, n_grid: usize) -> Result<GridFunction> {
    check_grid(n_grid)?;
    if n_grid < 4 * series.order() {
        return Err(Error::InvalidArgument(format!(
            "n_grid = {n_grid} too small for order {} (need >= {})",
            series.order(),
            4 * series.order()
        )));
    }
    GridFunction::from_fn(n_grid, |x| {
        let mut acc = series.a0;
        for (j, (&a, &b)) in series.cos().iter().zip(series.sin()).enumerate() {
            let (sn, cs) = (2.0 * PI * (j + 1) as f64 * x).sin_cos();
            acc += 2.0 * (a * cs + b * sn);
        }
        acc
    })
}

/// `(∫₀¹ |v|^p)^{1/p}` by Simpson quadrature.
pub fn lp_norm(v: &GridFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")));
    }
    let scale = v.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    // Scaling keeps |v/scale|^p in [0, 1] for large p.
    let powered: Vec<f64> = v.samples().iter().map(|s| (s.abs() / scale).powf(p)).collect();
    Ok(scale * simpson(&powered).max(0.0).powf(1.0 / p))
}

/// Symmetric and antisymmetric parts with respect to `x ↦ 1 − x`.
pub fn parity_split(v: &GridFunction) -> (GridFunction, GridFunction) {
    let s = v.samples();
    let n = v.n_grid();
    let even = (0..=n).map(|i| (s[i] + s[n - i]) / 2.0).collect();
    let odd = (0..=n).map(|i| (s[i] - s[n - i]) / 2.0).collect();
    (GridFunction { samples: even }, GridFunction { samples: odd })
}

pub(crate) fn simpson_weights(n_grid: usize) -> Vec<f64> {
    let h = 1.0 / n_grid as f64;
    (0..=n_grid)
        .map(|i| {
            let w = if i == 0 || i == n_grid {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Composite Simpson on [0, 1] for samples on an even uniform grid.
pub(crate) fn simpson(f: &[f64]) -> f64 {
    let n = f.len() - 1;
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = 1.0 / n as f64;
    let mut acc = f[0] + f[n];
    for (i, &fi) in f.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * fi } else { 2.0 * fi };
    }
    acc * h / 3.0
}

/// `I_i = ∫_{x_i}^1 f` at every node. Nodes an even number of steps from the
/// right end use pure Simpson panels; the others add one quadratic single-interval panel.
pub(crate) fn cumulative_simpson_from_right(f: &[f64]) -> Vec<f64> {
    let n = f.len() - 1;
    let h = 1.0 / n as f64;
    let mut out = vec![0.0; n + 1];
    let mut i = n;
    while i >= 2 {
        out[i - 2] = out[i] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        i -= 2;
    }
    // Odd distances: step left one interval from the even node to the right.
    let mut j = n - 1;
    loop {
        let panel = if j + 2 <= n {
            5.0 * f[j] + 8.0 * f[j + 1] - f[j + 2]
        } else {
            -f[j - 1] + 8.0 * f[j] + 5.0 * f[j + 1]
        };
        out[j] = out[j + 1] + h / 12.0 * panel;
        if j < 2 {
            break;
        }
        j -= 2;
    }
    out
}
