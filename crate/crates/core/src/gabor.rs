//! Discrete short-time Fourier transform and Gabor frames on periodized grids.
//!
//! Constants used throughout:
//!
//! | quantity | formula |
//! |---|---|
//! | STFT | `V[n,k] = (2π)^{-d/2} h^d Σ_m f_m conj(φ(x_m - x_n)) e^{-i x_m·ξ_k}` |
//! | synthesis | `f_m = (2π)^{d/2} h^{-d} Σ_{j,ι} c[j,ι] e^{i x_m·ξ_ι} ψ(x_m - x_j)` |
//! | Moyal | `Σ |V|² h^d Δξ^d = ‖f‖² ‖φ‖²` (grid norms, exact) |
//!
//! Window arguments `x_m - x_j` are taken periodically, i.e. at index
//! `(m - j + N/2) mod N` on each axis. Lattice points are the grid points whose
//! centered index `n - N/2` is a multiple of the stride, so the origin is
//! always on the lattice.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::CenteredDft;
use crate::lattice::{ravel, unravel, GridSpec, SampledField};
use crate::mixed_norm::{mixed_quasi_norm, modulation_flavor_spec, Exponent, Flavor};
use crate::operator::{OperatorMatrix, Provenance};
use crate::weights::Weight;

/// Largest number of phase-space coefficients any transform will allocate.
pub const DEFAULT_COEFF_CAP: usize = 1 << 24;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowKind {
    Gaussian,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    field: SampledField,
    kind: WindowKind,
    l2_norm: f64,
}

impl Window {
    /// `π^{-d/4} e^{-|x|²/2}`, unit `L²` norm on `ℝ^d`.
    pub fn gaussian(grid: &GridSpec) -> Window {
        let d = grid.dim() as f64;
        let c = PI.powf(-d / 4.0);
        let field = SampledField::from_fn(*grid, |x| {
            Complex64::new(c * (-0.5 * x.iter().map(|t| t * t).sum::<f64>()).exp(), 0.0)
        });
        Window { field, kind: WindowKind::Gaussian, l2_norm: 1.0 }
    }

    /// The Gaussian rescaled so that `φ(0) = 1`.
    pub fn unit_gaussian(grid: &GridSpec) -> Window {
        let d = grid.dim() as f64;
        Window::gaussian(grid).scaled(PI.powf(d / 4.0))
    }

    pub fn custom(field: SampledField) -> Result<Window> {
        let norm = field.l2_norm();
        if !(norm > 0.0) {
            return Err(Error::Config("window must be nonzero".into()));
        }
        Ok(Window { field, kind: WindowKind::Custom, l2_norm: norm })
    }

    pub fn scaled(&self, c: f64) -> Window {
        Window { field: self.field.scale(Complex64::new(c, 0.0)), kind: self.kind, l2_norm: self.l2_norm * c.abs() }
    }

    /// Tensor product on the concatenated axes of the two grids.
    pub fn tensor(&self, other: &Window) -> Result<Window> {
        let g = crate::lattice::product_grid(self.grid(), other.grid())?;
        let d1 = self.grid().dim();
        let n = g.n();
        let field = SampledField::from_fn(g, |_| ZERO);
        let mut values = field.into_values();
        for (flat, v) in values.iter_mut().enumerate() {
            let idx = unravel(flat, n, g.dim());
            *v = self.field.get(&idx[..d1]) * other.field.get(&idx[d1..]);
        }
        let kind = if self.kind == WindowKind::Gaussian && other.kind == WindowKind::Gaussian {
            WindowKind::Gaussian
        } else {
            WindowKind::Custom
        };
        Ok(Window { field: SampledField::new(g, values)?, kind, l2_norm: self.l2_norm * other.l2_norm })
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.spec()
    }

    pub fn field(&self) -> &SampledField {
        &self.field
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    /// `L²(ℝ^d)` norm: analytic for Gaussians, grid quadrature otherwise.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn grid_norm(&self) -> f64 {
        self.field.l2_norm()
    }

    pub fn value_at_origin(&self) -> Complex64 {
        let n = self.grid().n();
        self.field.get(&vec![n / 2; self.grid().dim()])
    }

    /// Samples `φ(x_m - x_j)` for every `m`, with `j` a multi-index.
    pub fn translated(&self, j: &[usize]) -> Vec<Complex64> {
        let g = self.grid();
        let n = g.n();
        let vals = self.field.values();
        let mut out = vec![ZERO; g.len()];
        let mut src = vec![0usize; g.dim()];
        for (m, o) in out.iter_mut().enumerate() {
            let mi = unravel(m, n, g.dim());
            for k in 0..g.dim() {
                src[k] = (mi[k] + n + n / 2 - j[k]) % n;
            }
            *o = vals[ravel(&src, n)];
        }
        out
    }
}

/// Centered indices `i` with `(i - N/2) ≡ 0 (mod stride)`.
pub fn lattice_indices(n: usize, stride: usize) -> Vec<usize> {
    (0..n).filter(|&i| (i as i64 - (n / 2) as i64).rem_euclid(stride as i64) == 0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceArray {
    grid: GridSpec,
    strides: (usize, usize),
    values: Vec<Complex64>,
}

impl PhaseSpaceArray {
    pub fn new(grid: GridSpec, strides: (usize, usize), values: Vec<Complex64>) -> Result<Self> {
        check_strides(&grid, strides)?;
        let len = (grid.n() / strides.0).pow(grid.dim() as u32) * (grid.n() / strides.1).pow(grid.dim() as u32);
        if values.len() != len {
            return Err(Error::ShapeMismatch(format!("expected {len} coefficients, got {}", values.len())));
        }
        Ok(PhaseSpaceArray { grid, strides, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn strides(&self) -> (usize, usize) {
        self.strides
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

    /// Points per spatial and per frequency axis.
    pub fn block_sizes(&self) -> (usize, usize) {
        (self.grid.n() / self.strides.0, self.grid.n() / self.strides.1)
    }

    /// Shape `[N/a; d] ++ [N/b; d]`.
    pub fn shape(&self) -> Vec<usize> {
        let (na, nb) = self.block_sizes();
        let d = self.grid.dim();
        let mut s = vec![na; d];
        s.extend(std::iter::repeat_n(nb, d));
        s
    }

    /// Grid indices of the spatial and frequency lattice points on one axis.
    pub fn lattice(&self) -> (Vec<usize>, Vec<usize>) {
        (lattice_indices(self.grid.n(), self.strides.0), lattice_indices(self.grid.n(), self.strides.1))
    }

    /// Coordinates of every axis, spatial axes first.
    pub fn coords(&self) -> Vec<Vec<f64>> {
        let (xs, ks) = self.lattice();
        let d = self.grid.dim();
        let x: Vec<f64> = xs.iter().map(|&i| self.grid.coord(i)).collect();
        let xi: Vec<f64> = ks.iter().map(|&i| self.grid.freq(i)).collect();
        let mut out = vec![x; d];
        out.extend(std::iter::repeat_n(xi, d));
        out
    }

    /// Cell measures of a spatial and a frequency axis.
    pub fn cells(&self) -> (f64, f64) {
        (self.strides.0 as f64 * self.grid.step(), self.strides.1 as f64 * self.grid.freq_step())
    }

    pub fn view(&self) -> ndarray::ArrayViewD<'_, Complex64> {
        ndarray::ArrayViewD::from_shape(ndarray::IxDyn(&self.shape()), &self.values).expect("shape is consistent")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn check_strides(grid: &GridSpec, (a, b): (usize, usize)) -> Result<()> {
    let n = grid.n();
    if a == 0 || b == 0 || n % a != 0 || n % b != 0 {
        return Err(Error::Config(format!("strides ({a}, {b}) must be positive divisors of N = {n}")));
    }
    Ok(())
}

/// STFT restricted to lattice shifts and frequencies, refusing to allocate
/// more than `cap` coefficients.
pub fn lattice_stft(f: &SampledField, phi: &Window, strides: (usize, usize), cap: usize) -> Result<PhaseSpaceArray> {
    let g = *f.spec();
    if phi.grid() != &g {
        return Err(Error::GridMismatch("window and field grids differ".into()));
    }
    check_strides(&g, strides)?;
    let d = g.dim();
    let n = g.n();
    let (xs, ks) = (lattice_indices(n, strides.0), lattice_indices(n, strides.1));
    let shifts = xs.len().pow(d as u32);
    let freqs = ks.len().pow(d as u32);
    let total = shifts.saturating_mul(freqs);
    if total > cap {
        return Err(Error::MemoryGuard { entries: total, cap });
    }
    let dft = CenteredDft::new(n);
    let c = (2.0 * PI).powf(-(d as f64) / 2.0) * g.cell();
    let fv = f.values();
    let rows: Vec<Vec<Complex64>> = (0..shifts)
        .into_par_iter()
        .map(|s| {
            let j: Vec<usize> = unravel(s, xs.len(), d).into_iter().map(|i| xs[i]).collect();
            let win = phi.translated(&j);
            let mut buf: Vec<Complex64> = fv.iter().zip(&win).map(|(a, w)| a * w.conj()).collect();
            dft.forward_all(&mut buf, d);
            if strides.1 == 1 {
                buf.iter_mut().for_each(|v| *v *= c);
                buf
            } else {
                (0..freqs)
                    .map(|t| {
                        let k: Vec<usize> = unravel(t, ks.len(), d).into_iter().map(|i| ks[i]).collect();
                        buf[ravel(&k, n)] * c
                    })
                    .collect()
            }
        })
        .collect();
    PhaseSpaceArray::new(g, strides, rows.concat())
}

/// Full-lattice STFT `V_φ f` with shape `N^d × N^d`.
pub fn stft(f: &SampledField, phi: &Window) -> Result<PhaseSpaceArray> {
    lattice_stft(f, phi, (1, 1), DEFAULT_COEFF_CAP)
}

/// Full-lattice STFT with an explicit coefficient cap.
pub fn stft_capped(f: &SampledField, phi: &Window, cap: usize) -> Result<PhaseSpaceArray> {
    lattice_stft(f, phi, (1, 1), cap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaborSystem {
    grid: GridSpec,
    a_step: usize,
    b_step: usize,
    window: Window,
    dual: Option<Window>,
}

impl GaborSystem {
    pub fn new(window: Window, a_step: usize, b_step: usize) -> Result<Self> {
        let grid = *window.grid();
        check_strides(&grid, (a_step, b_step))?;
        if a_step * b_step > grid.n() {
            return Err(Error::NotAFrame(format!(
                "a_step * b_step = {} exceeds N = {}",
                a_step * b_step,
                grid.n()
            )));
        }
        Ok(GaborSystem { grid, a_step, b_step, window, dual: None })
    }

    /// Same system with its canonical dual window attached.
    pub fn with_canonical_dual(mut self) -> Result<Self> {
        self.dual = Some(dual_window(&self)?);
        Ok(self)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn strides(&self) -> (usize, usize) {
        (self.a_step, self.b_step)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dual(&self) -> Option<&Window> {
        self.dual.as_ref()
    }
}

pub fn gabor_coefficients(f: &SampledField, system: &GaborSystem) -> Result<PhaseSpaceArray> {
    lattice_stft(f, &system.window, system.strides(), DEFAULT_COEFF_CAP)
}

/// Analysis coefficients of `f` against an arbitrary window on the lattice.
pub fn gabor_coefficients_with(f: &SampledField, window: &Window, strides: (usize, usize)) -> Result<PhaseSpaceArray> {
    lattice_stft(f, window, strides, DEFAULT_COEFF_CAP)
}

/// `S[m,m'] = Σ_j φ(x_m-x_j) conj(φ(x_{m'}-x_j)) Σ_ι e^{i(x_m-x_{m'})·ξ_ι}`, the
/// composition of synthesis with analysis for the window itself.
pub fn frame_operator(system: &GaborSystem) -> Result<OperatorMatrix> {
    let g = system.grid;
    let n = g.n();
    let d = g.dim();
    let (a, b) = system.strides();
    let xs = lattice_indices(n, a);
    let period = n / b;
    let modulation = (n / b).pow(d as u32) as f64;
    let len = g.len();
    let translates: Vec<Vec<Complex64>> = (0..xs.len().pow(d as u32))
        .into_par_iter()
        .map(|s| {
            let j: Vec<usize> = unravel(s, xs.len(), d).into_iter().map(|i| xs[i]).collect();
            system.window.translated(&j)
        })
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..len)
        .into_par_iter()
        .map(|m| {
            let mi = unravel(m, n, d);
            (0..len)
                .map(|mp| {
                    let mpi = unravel(mp, n, d);
                    if mi.iter().zip(&mpi).any(|(x, y)| (x + n - y) % period != 0) {
                        return ZERO;
                    }
                    let s: Complex64 = translates.iter().map(|t| t[m] * t[mp].conj()).sum();
                    s * modulation
                })
                .collect()
        })
        .collect();
    let entries = DMatrix::from_row_iterator(len, len, rows.into_iter().flatten());
    OperatorMatrix::new(entries, g, g, Provenance::FrameOperator)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn condition(&self) -> f64 {
        self.upper / self.lower
    }
}

pub fn frame_bounds(system: &GaborSystem) -> Result<FrameBounds> {
    let s = frame_operator(system)?;
    let eig = s.entries.symmetric_eigen();
    let lower = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FrameBounds { lower, upper })
}

/// Canonical dual `γ = S⁻¹φ`.
pub fn dual_window(system: &GaborSystem) -> Result<Window> {
    let bounds = frame_bounds(system)?;
    if !(bounds.lower > 0.0) || bounds.condition() > 1e8 {
        return Err(Error::NotAFrame(format!(
            "frame bounds ({:.3e}, {:.3e})",
            bounds.lower, bounds.upper
        )));
    }
    let s = frame_operator(system)?;
    let rhs = nalgebra::DVector::from_column_slice(system.window.field().values());
    let sol = match s.entries.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => s
            .entries
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NotAFrame("frame operator is singular".into()))?,
    };
    Window::custom(SampledField::new(system.grid, sol.as_slice().to_vec())?)
}

/// `f_m = (2π)^{d/2} h^{-d} Σ c[j,ι] e^{i x_m·ξ_ι} ψ(x_m - x_j)`.
pub fn gabor_synthesis(c: &PhaseSpaceArray, psi: &Window) -> Result<SampledField> {
    let g = *c.grid();
    if psi.grid() != &g {
        return Err(Error::ShapeMismatch("synthesis window grid differs from coefficient grid".into()));
    }
    let d = g.dim();
    let n = g.n();
    let (xs, ks) = c.lattice();
    let freqs = ks.len().pow(d as u32);
    let norm_const = (2.0 * PI).powf(d as f64 / 2.0) / g.cell();
    let dft = CenteredDft::new(n);
    let scale = norm_const * g.len() as f64;
    let parts: Vec<Vec<Complex64>> = (0..xs.len().pow(d as u32))
        .into_par_iter()
        .map(|s| {
            let row = &c.values()[s * freqs..(s + 1) * freqs];
            let mut buf = vec![ZERO; g.len()];
            for (t, v) in row.iter().enumerate() {
                let k: Vec<usize> = unravel(t, ks.len(), d).into_iter().map(|i| ks[i]).collect();
                buf[ravel(&k, n)] = *v;
            }
            dft.inverse_all(&mut buf, d);
            let j: Vec<usize> = unravel(s, xs.len(), d).into_iter().map(|i| xs[i]).collect();
            let win = psi.translated(&j);
            buf.iter().zip(&win).map(|(u, w)| u * w * scale).collect()
        })
        .collect();
    let mut out = vec![ZERO; g.len()];
    for part in &parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    SampledField::new(g, out)
}

/// `‖f‖` in `M^{p,q}_{(ω)}` (flavor `M`) or `W^{p,q}_{(ω)}` (flavor `W`) from lattice coefficients.
#[allow(clippy::too_many_arguments)]
pub fn modulation_norm(
    f: &SampledField,
    phi: &Window,
    p: &[Exponent],
    q: &[Exponent],
    omega: &Weight,
    flavor: Flavor,
    strides: (usize, usize),
) -> Result<f64> {
    let coeffs = gabor_coefficients_with(f, phi, strides)?;
    coefficient_norm(&coeffs, p, q, omega, flavor, None)
}

/// Mixed norm of precomputed coefficients; `cells = None` uses the lattice cells.
pub fn coefficient_norm(
    coeffs: &PhaseSpaceArray,
    p: &[Exponent],
    q: &[Exponent],
    omega: &Weight,
    flavor: Flavor,
    cells: Option<(f64, f64)>,
) -> Result<f64> {
    let d = coeffs.grid().dim();
    let spec = modulation_flavor_spec(p, q, d, flavor, omega.clone(), cells.unwrap_or(coeffs.cells()))?;
    mixed_quasi_norm(coeffs.view(), &coeffs.coords(), &spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::self_dual(1, n).unwrap()
    }

    fn direct_stft(f: &SampledField, phi: &Window, n_idx: usize, k_idx: usize) -> Complex64 {
        let g = f.spec();
        let n = g.n();
        let mut acc = ZERO;
        for m in 0..n {
            let w = phi.field().values()[(m + n + n / 2 - n_idx) % n];
            acc += f.values()[m] * w.conj() * Complex64::from_polar(1.0, -g.coord(m) * g.freq(k_idx));
        }
        acc * g.step() / (2.0 * PI).sqrt()
    }

    fn test_field(g: GridSpec, seed: f64) -> SampledField {
        SampledField::from_fn(g, |x| {
            let t = x[0];
            Complex64::new((seed * t).cos(), (0.3 * t + seed).sin()) * (-(t - 0.5 * seed).powi(2) / 3.0).exp()
        })
    }

    #[test]
    fn stft_matches_direct_sum() {
        let g = grid1(16);
        let f = test_field(g, 0.7);
        let phi = Window::gaussian(&g);
        let v = stft(&f, &phi).unwrap();
        for n in 0..16 {
            for k in 0..16 {
                let a = v.values()[n * 16 + k];
                assert!((a - direct_stft(&f, &phi, n, k)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn gaussian_self_stft_magnitude() {
        let g = grid1(64);
        let phi = Window::gaussian(&g);
        let v = stft(phi.field(), &phi).unwrap();
        for n in 0..64 {
            for k in 0..64 {
                let (x, xi) = (g.coord(n), g.freq(k));
                if x.abs() <= 3.0 && xi.abs() <= 3.0 {
                    let expect = (-(x * x + xi * xi) / 4.0).exp() / (2.0 * PI).sqrt();
                    let got = v.values()[n * 64 + k].norm();
                    assert!((got - expect).abs() <= 1e-6 * expect, "{x} {xi} {got} {expect}");
                }
            }
        }
    }

    #[test]
    fn moyal_exact_on_grid() {
        let g = grid1(32);
        let f = test_field(g, 1.3);
        let phi = Window::gaussian(&g);
        let v = stft(&f, &phi).unwrap();
        let lhs: f64 = v.values().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.step() * g.freq_step();
        let rhs = f.l2_norm().powi(2) * phi.grid_norm().powi(2);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        let two = Exponent(2.0);
        let m = modulation_norm(&f, &phi, &[two], &[two], &Weight::one(), Flavor::M, (1, 1)).unwrap();
        assert!((m - f.l2_norm() * phi.grid_norm()).abs() <= 1e-12 * m);
    }

    #[test]
    fn zero_field_and_translation_covariance() {
        let g = grid1(16);
        let phi = Window::gaussian(&g);
        let v = stft(&SampledField::zeros(g), &phi).unwrap();
        assert!(v.values().iter().all(|c| *c == ZERO));

        let f = test_field(g, 0.4);
        let shifted = SampledField::new(g, (0..16).map(|m| f.values()[(m + 15) % 16]).collect()).unwrap();
        let v0 = stft(&f, &phi).unwrap();
        let v1 = stft(&shifted, &phi).unwrap();
        for n in 0..16 {
            for k in 0..16 {
                let a = v1.values()[n * 16 + k].norm();
                let b = v0.values()[((n + 15) % 16) * 16 + k].norm();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sub_lattice_coefficients() {
        let g = grid1(16);
        let f = test_field(g, 2.1);
        let phi = Window::gaussian(&g);
        let sys = GaborSystem::new(phi.clone(), 2, 2).unwrap();
        let c = gabor_coefficients(&f, &sys).unwrap();
        assert_eq!(c.shape(), vec![8, 8]);
        let idx = lattice_indices(16, 2);
        assert!(idx.contains(&8));
        for (a, &n) in idx.iter().enumerate() {
            for (b, &k) in idx.iter().enumerate() {
                assert!((c.values()[a * 8 + b] - direct_stft(&f, &phi, n, k)).norm() < 1e-12);
            }
        }
        let full = GaborSystem::new(phi.clone(), 1, 1).unwrap();
        assert_eq!(gabor_coefficients(&f, &full).unwrap(), stft(&f, &phi).unwrap());
    }

    #[test]
    fn density_violation() {
        let g = grid1(16);
        assert!(matches!(GaborSystem::new(Window::gaussian(&g), 8, 4), Err(Error::NotAFrame(_))));
    }

    #[test]
    fn full_lattice_dual_is_scaled_window() {
        let g = grid1(16);
        let phi = Window::gaussian(&g);
        let sys = GaborSystem::new(phi.clone(), 1, 1).unwrap();
        let gamma = dual_window(&sys).unwrap();
        let c = 16.0 / g.step() * phi.grid_norm().powi(2);
        for (a, b) in gamma.field().values().iter().zip(phi.field().values()) {
            assert!((a * c - b).norm() < 1e-12);
        }
    }

    #[test]
    fn unit_coefficient_synthesizes_window() {
        let g = grid1(16);
        let psi = Window::gaussian(&g);
        let mut vals = vec![ZERO; 16 * 16];
        vals[8 * 16 + 8] = Complex64::new(1.0, 0.0);
        let c = PhaseSpaceArray::new(g, (1, 1), vals).unwrap();
        let f = gabor_synthesis(&c, &psi).unwrap();
        let k = (2.0 * PI).sqrt() / g.step();
        for (a, b) in f.values().iter().zip(psi.field().values()) {
            assert!((a - b * k).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_with_sub_lattice_dual() {
        let g = grid1(24);
        let sys = GaborSystem::new(Window::gaussian(&g), 3, 2).unwrap().with_canonical_dual().unwrap();
        let f = test_field(g, 0.9);
        let c = gabor_coefficients(&f, &sys).unwrap();
        let back = gabor_synthesis(&c, sys.dual().unwrap()).unwrap();
        let err = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10 * f.max_abs(), "{err}");
    }
}
