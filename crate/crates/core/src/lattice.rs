//! Periodized uniform grids and sampled fields.
//!
//! A [`GridSpec`] describes `N` points per axis on each of `dim` axes with
//! spatial step `h`. Coordinates are centered so that index `N/2` is the
//! origin: `x_n = (n - N/2) h`. The frequency dual has step `2π/(N h)` and the
//! same centering. All fields are treated as `N`-periodic along every axis;
//! inputs are expected to decay to negligible size at the grid boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    dim: usize,
    n: usize,
    step: f64,
    freq_step: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    dim: usize,
    n: usize,
    step: f64,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSpec::new(raw.dim, raw.n, raw.step)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid { dim: g.dim, n: g.n, step: g.step }
    }
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, step: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("points per axis must be even and >= 4, got {n}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive and finite, got {step}")));
        }
        // The self-dual step round-trips bit-exactly through files and manifests.
        let freq_step = if step == (2.0 * PI / n as f64).sqrt() { step } else { 2.0 * PI / (n as f64 * step) };
        Ok(GridSpec { dim, n, step, freq_step })
    }

    /// Grid with `h = sqrt(2π/N)`, whose frequency step equals its spatial step.
    pub fn self_dual(dim: usize, n: usize) -> Result<Self> {
        GridSpec::new(dim, n, (2.0 * PI / n as f64).sqrt())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn freq_step(&self) -> f64 {
        self.freq_step
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.dim]
    }

    pub fn is_self_dual(&self) -> bool {
        (self.step - self.freq_step).abs() <= 1e-12 * self.step
    }

    /// Same grid with `dim` replaced.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        Ok(GridSpec { dim, ..*self })
    }

    pub fn coord(&self, index: usize) -> f64 {
        (index as f64 - (self.n / 2) as f64) * self.step
    }

    pub fn freq(&self, index: usize) -> f64 {
        (index as f64 - (self.n / 2) as f64) * self.freq_step
    }

    /// Nearest grid index to `x` (periodic) and the snap distance.
    pub fn index_of(&self, x: f64) -> (usize, f64) {
        let k = (x / self.step).round();
        let dist = (x - k * self.step).abs();
        let n = self.n as i64;
        let idx = (k as i64 + n / 2).rem_euclid(n) as usize;
        (idx, dist)
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.freq(i)).collect()
    }

    /// Coordinates of the point with flat row-major index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        unravel(flat, self.n, self.dim).into_iter().map(|i| self.coord(i)).collect()
    }

    /// Cell measure `h^dim`.
    pub fn cell(&self) -> f64 {
        self.step.powi(self.dim as i32)
    }
}

pub fn dual_grid(spec: &GridSpec) -> GridSpec {
    GridSpec { dim: spec.dim, n: spec.n, step: spec.freq_step, freq_step: spec.step }
}

pub fn product_grid(a: &GridSpec, b: &GridSpec) -> Result<GridSpec> {
    if a.n != b.n || a.step != b.step {
        return Err(Error::GridMismatch(format!(
            "(N={}, h={}) vs (N={}, h={})",
            a.n, a.step, b.n, b.step
        )));
    }
    Ok(GridSpec { dim: a.dim + b.dim, ..*a })
}

/// Row-major multi-index of `flat` on an `n^dim` array, axis 0 slowest.
pub fn unravel(mut flat: usize, n: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0; dim];
    for k in (0..dim).rev() {
        idx[k] = flat % n;
        flat /= n;
    }
    idx
}

pub fn ravel(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Complex samples on a product grid, row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for grid, got {}",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(SampledField { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        SampledField { spec, values: vec![Complex64::new(0.0, 0.0); spec.len()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..spec.len()).map(|i| f(&spec.point(i))).collect();
        SampledField { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.values[ravel(idx, self.spec.n)]
    }

    /// Discrete `L²` norm `(h^d Σ |f|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.spec.cell() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledField { spec: self.spec, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &SampledField) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch("cannot add fields on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SampledField { spec: self.spec, values })
    }
}
