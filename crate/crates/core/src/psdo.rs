//! Quantizations `Op_t`, amplitude operators `Op(a)`, the exponential Fourier
//! multiplier calculus and the amplitude-to-symbol reduction.
//!
//! Symbols live on `2d` axes `(x, ξ)` and amplitudes on `3d` axes `(x, y, ζ)`,
//! all sampled on one self-dual grid (`h = Δξ = sqrt(2π/N)`), so that the
//! frequency axes of a symbol coincide with the dual grid of its spatial axes.
//! Matrices act on grid values: `(Op f)_m = Σ_n M[m,n] f_n`, with
//!
//! * `Op_0(a₀)[m,n] = N^{-d} Σ_k a₀(x_m, ξ_k) e^{i(x_m - x_n)·ξ_k}`,
//! * `Op(a)[m,n] = N^{-d} Σ_k a(x_m, x_n, ζ_k) e^{i(x_m - x_n)·ζ_k}`,
//!
//! where `x_m - x_n` is taken periodically.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::CenteredDft;
use crate::gabor::{lattice_indices, lattice_stft, modulation_norm, Window, DEFAULT_COEFF_CAP};
use crate::lattice::{ravel, unravel, GridSpec, SampledField};
use crate::mixed_norm::{mixed_norm_of_magnitudes, modulation_flavor_spec, Exponent, Flavor};
use crate::operator::{OperatorMatrix, Provenance};
use crate::weights::Weight;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `A = t·I` with `t ∈ {0, 1/2, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QuantizationMatrix {
    t: f64,
}

impl TryFrom<f64> for QuantizationMatrix {
    type Error = Error;
    fn try_from(t: f64) -> Result<Self> {
        QuantizationMatrix::new(t)
    }
}

impl From<QuantizationMatrix> for f64 {
    fn from(q: QuantizationMatrix) -> f64 {
        q.t
    }
}

impl QuantizationMatrix {
    pub const KOHN_NIRENBERG: QuantizationMatrix = QuantizationMatrix { t: 0.0 };
    pub const WEYL: QuantizationMatrix = QuantizationMatrix { t: 0.5 };
    pub const RIGHT: QuantizationMatrix = QuantizationMatrix { t: 1.0 };

    pub fn new(t: f64) -> Result<Self> {
        if t == 0.0 || t == 0.5 || t == 1.0 {
            Ok(QuantizationMatrix { t })
        } else {
            Err(Error::UnsupportedA(t))
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// A contiguous run of axes `offset .. offset + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisBlock {
    pub offset: usize,
    pub len: usize,
}

impl AxisBlock {
    pub fn new(offset: usize, len: usize) -> Self {
        AxisBlock { offset, len }
    }

    fn axes(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

fn block_dim(grid: &GridSpec, blocks: usize) -> Result<usize> {
    if grid.dim() % blocks != 0 || grid.dim() == 0 {
        return Err(Error::DimensionMismatch { expected: blocks * (grid.dim() / blocks).max(1), got: grid.dim() });
    }
    Ok(grid.dim() / blocks)
}

fn require_self_dual(grid: &GridSpec) -> Result<()> {
    if !grid.is_self_dual() {
        return Err(Error::GridMismatch(format!(
            "symbol grids must be self-dual (h = sqrt(2π/N)); got h = {}, Δξ = {}",
            grid.step(),
            grid.freq_step()
        )));
    }
    Ok(())
}

/// Flat index of `(m - n + N/2) mod N` per axis, for all pairs.
fn difference_table(n: usize, d: usize) -> Vec<usize> {
    let len = n.pow(d as u32);
    let mut out = Vec::with_capacity(len * len);
    for a in 0..len {
        let ai = unravel(a, n, d);
        for b in 0..len {
            let bi = unravel(b, n, d);
            let di: Vec<usize> = ai.iter().zip(&bi).map(|(&x, &y)| (x + n + n / 2 - y) % n).collect();
            out.push(ravel(&di, n));
        }
    }
    out
}

/// Refines the listed axes of a row-major array by 2× spectral (band-limited)
/// interpolation; the Nyquist bin is split evenly between `±N/2`.
fn refine_axes(values: &[Complex64], shape: &[usize], axes: &[usize]) -> (Vec<Complex64>, Vec<usize>) {
    let mut cur = values.to_vec();
    let mut shape = shape.to_vec();
    for &axis in axes {
        let n = shape[axis];
        let coarse = CenteredDft::new(n);
        let fine = CenteredDft::new(2 * n);
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut next = vec![ZERO; cur.len() * 2];
        let mut line = vec![ZERO; n];
        let mut wide = vec![ZERO; 2 * n];
        for o in 0..outer {
            for i in 0..inner {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = cur[(o * n + j) * inner + i];
                }
                coarse.apply_axes(&mut line, 1, &[0], false);
                wide.iter_mut().for_each(|v| *v = ZERO);
                for (k, v) in line.iter().enumerate() {
                    if k == 0 {
                        wide[n / 2] = v * 0.5;
                        wide[n + n / 2] = v * 0.5;
                    } else {
                        wide[k + n / 2] = *v;
                    }
                }
                fine.apply_axes(&mut wide, 1, &[0], true);
                for (j, v) in wide.iter().enumerate() {
                    next[(o * 2 * n + j) * inner + i] = v * 2.0;
                }
            }
        }
        shape[axis] = 2 * n;
        cur = next;
    }
    (cur, shape)
}

/// `w_l[j] = N^{-d} Σ_k row_l[k] e^{i x_j·ξ_k}` for every row of length `N^d`.
fn inverse_rows(rows: &[Complex64], n: usize, d: usize) -> Vec<Vec<Complex64>> {
    let len = n.pow(d as u32);
    let dft = CenteredDft::new(n);
    rows.par_chunks(len)
        .map(|r| {
            let mut buf = r.to_vec();
            dft.inverse_all(&mut buf, d);
            buf
        })
        .collect()
}

/// Matrix of `Op_t(a₀)` for a symbol on `2d` axes `(x, ξ)`.
pub fn op_from_symbol(a0: &SampledField, quant: QuantizationMatrix) -> Result<OperatorMatrix> {
    let g2 = *a0.spec();
    let d = block_dim(&g2, 2)?;
    require_self_dual(&g2)?;
    let n = g2.n();
    let g = g2.with_dim(d)?;
    let len = g.len();
    let diff = difference_table(n, d);
    let t = quant.t();
    let entries = if t == 0.5 {
        let shape = vec![n; 2 * d];
        let (fine, _) = refine_axes(a0.values(), &shape, &(0..d).collect::<Vec<_>>());
        let w = inverse_rows(&fine, n, d);
        DMatrix::from_fn(len, len, |m, k| {
            let mi = unravel(m, n, d);
            let ki = unravel(k, n, d);
            // Midpoint along the centered periodic difference δ: fine index 2m - δ.
            let mid: Vec<usize> = mi
                .iter()
                .zip(&ki)
                .map(|(&a, &b)| {
                    let delta = (a + n + n / 2 - b) % n;
                    (2 * a + 2 * n + n / 2 - delta) % (2 * n)
                })
                .collect();
            w[ravel(&mid, 2 * n)][diff[m * len + k]]
        })
    } else {
        let w = inverse_rows(a0.values(), n, d);
        DMatrix::from_fn(len, len, |m, k| {
            let row = if t == 0.0 { m } else { k };
            w[row][diff[m * len + k]]
        })
    };
    OperatorMatrix::new(entries, g, g, Provenance::Symbol { t })
}

/// Matrix of the amplitude operator `Op(a)` for `a` on `3d` axes `(x, y, ζ)`.
pub fn op_from_amplitude(a: &SampledField) -> Result<OperatorMatrix> {
    let g3 = *a.spec();
    let d = block_dim(&g3, 3)?;
    require_self_dual(&g3)?;
    let n = g3.n();
    let g = g3.with_dim(d)?;
    let len = g.len();
    let diff = difference_table(n, d);
    let phase: Vec<Complex64> = (0..len * len)
        .map(|flat| {
            let j = unravel(flat / len, n, d);
            let k = unravel(flat % len, n, d);
            let dot: f64 = j.iter().zip(&k).map(|(&x, &z)| g.coord(x) * g.freq(z)).sum();
            Complex64::from_polar(1.0, dot)
        })
        .collect();
    let scale = 1.0 / len as f64;
    let vals = a.values();
    let rows: Vec<Vec<Complex64>> = (0..len)
        .into_par_iter()
        .map(|m| {
            (0..len)
                .map(|k| {
                    let base = (m * len + k) * len;
                    let ph = &phase[diff[m * len + k] * len..(diff[m * len + k] + 1) * len];
                    let s: Complex64 = vals[base..base + len].iter().zip(ph).map(|(v, p)| v * p).sum();
                    s * scale
                })
                .collect()
        })
        .collect();
    let entries = DMatrix::from_row_iterator(len, len, rows.into_iter().flatten());
    OperatorMatrix::new(entries, g, g, Provenance::Amplitude)
}

/// `e^{i·sign·scale·⟨D_second, D_first⟩} u` with `D = -i∂`.
///
/// The plane wave `e^{i(y·b + ζ·c)}` (`y` on the first block, `ζ` on the
/// second) is an eigenfunction with eigenvalue `e^{i·sign·scale·⟨c, b⟩}`.
pub fn exp_multiplier(u: &SampledField, first: AxisBlock, second: AxisBlock, sign: f64, scale: f64) -> Result<SampledField> {
    if first.len != second.len {
        return Err(Error::BlockMismatch(first.len, second.len));
    }
    let g = *u.spec();
    let dim = g.dim();
    if first.offset + first.len > dim || second.offset + second.len > dim {
        return Err(Error::DimensionMismatch { expected: dim, got: (first.offset + first.len).max(second.offset + second.len) });
    }
    if scale == 0.0 {
        return Ok(u.clone());
    }
    let n = g.n();
    let axes: Vec<usize> = first.axes().chain(second.axes()).collect();
    let dft = CenteredDft::new(n);
    let mut data = u.values().to_vec();
    dft.apply_axes(&mut data, dim, &axes, false);
    let freqs = g.freqs();
    data.par_iter_mut().enumerate().for_each(|(flat, v)| {
        let idx = unravel(flat, n, dim);
        let dot: f64 = first.axes().zip(second.axes()).map(|(a, b)| freqs[idx[a]] * freqs[idx[b]]).sum();
        *v *= Complex64::from_polar(1.0, sign * scale * dot);
    });
    dft.apply_axes(&mut data, dim, &axes, true);
    SampledField::new(g, data)
}

/// `a₂` with `Op_{t₁}(a₁) = Op_{t₂}(a₂)`, namely `a₂ = e^{i(t₁-t₂)⟨D_ξ, D_x⟩} a₁`.
pub fn calculus_transfer(a1: &SampledField, from: QuantizationMatrix, to: QuantizationMatrix) -> Result<SampledField> {
    let d = block_dim(a1.spec(), 2)?;
    exp_multiplier(a1, AxisBlock::new(0, d), AxisBlock::new(d, d), 1.0, from.t() - to.t())
}

/// Sheared copy `b(x, y, ζ) = a(x, x + y, ζ)` with periodic indexing.
fn shear(a: &SampledField, d: usize) -> Vec<Complex64> {
    let g = a.spec();
    let n = g.n();
    let len = n.pow(d as u32);
    let vals = a.values();
    let mut out = vec![ZERO; vals.len()];
    for x in 0..len {
        let xi = unravel(x, n, d);
        for y in 0..len {
            let yi = unravel(y, n, d);
            let s: Vec<usize> = xi.iter().zip(&yi).map(|(&p, &q)| (p + q + n - n / 2) % n).collect();
            let src = (x * len + ravel(&s, n)) * len;
            let dst = (x * len + y) * len;
            out[dst..dst + len].copy_from_slice(&vals[src..src + len]);
        }
    }
    out
}

/// Kohn-Nirenberg symbol `a₀` with `Op(a) = Op_0(a₀)`: shear, then
/// `e^{i⟨D_ζ, D_y⟩}`, then restrict to `y = 0`.
pub fn reduce_amplitude(a: &SampledField) -> Result<SampledField> {
    let g3 = *a.spec();
    let d = block_dim(&g3, 3)?;
    let n = g3.n();
    let len = n.pow(d as u32);
    let b = SampledField::new(g3, shear(a, d))?;
    let c = exp_multiplier(&b, AxisBlock::new(d, d), AxisBlock::new(2 * d, d), 1.0, 1.0)?;
    let y0 = ravel(&vec![n / 2; d], n);
    let mut out = Vec::with_capacity(len * len);
    for x in 0..len {
        let base = (x * len + y0) * len;
        out.extend_from_slice(&c.values()[base..base + len]);
    }
    SampledField::new(g3.with_dim(2 * d)?, out)
}

/// Amplitude `a = e^{-i⟨D_ζ, D_y⟩}(a₀(x, ζ) φ(y - x))`; requires `φ(0) = 1`.
pub fn extend_symbol(a0: &SampledField, phi: &Window) -> Result<SampledField> {
    let g2 = *a0.spec();
    let d = block_dim(&g2, 2)?;
    let n = g2.n();
    if phi.grid().dim() != d || phi.grid().n() != n || phi.grid().step() != g2.step() {
        return Err(Error::GridMismatch("extension window grid".into()));
    }
    let len = n.pow(d as u32);
    let g3 = g2.with_dim(3 * d)?;
    let pv = phi.field().values();
    let mut vals = vec![ZERO; g3.len()];
    for x in 0..len {
        let xi = unravel(x, n, d);
        for y in 0..len {
            let yi = unravel(y, n, d);
            let s: Vec<usize> = yi.iter().zip(&xi).map(|(&p, &q)| (p + n + n / 2 - q) % n).collect();
            let w = pv[ravel(&s, n)];
            let dst = (x * len + y) * len;
            for (o, v) in vals[dst..dst + len].iter_mut().zip(&a0.values()[x * len..(x + 1) * len]) {
                *o = v * w;
            }
        }
    }
    let c = SampledField::new(g3, vals)?;
    exp_multiplier(&c, AxisBlock::new(d, d), AxisBlock::new(2 * d, d), -1.0, 1.0)
}

/// Which amplitude quasi-norm: `𝓜` contracts the spatial axes first, `𝓦` the frequency axes.
pub type AmplitudeFlavor = Flavor;

/// `‖a‖` in `𝓜^{p,q}_{(ω)}` or `𝓦^{p,q}_{(ω)}` with one exponent per block.
///
/// Computes `F = V_φ a · ω` on the `6d` phase-space lattice, then the norm of
/// `G₁(x, y, ζ, ξ, η, z) = F(x, x + y, ζ, ξ, η, z)` with exponents
/// `(p, q)` (flavor `M`) or with the frequency axes contracted first and
/// exponents `(q, p)` (flavor `W`).
#[allow(clippy::too_many_arguments)]
pub fn amplitude_mod_norm(
    a: &SampledField,
    phi3: &Window,
    p: &[Exponent; 3],
    q: &[Exponent; 3],
    omega: &Weight,
    flavor: AmplitudeFlavor,
    strides: (usize, usize),
) -> Result<f64> {
    amplitude_mod_norm_capped(a, phi3, p, q, omega, flavor, strides, DEFAULT_COEFF_CAP)
}

#[allow(clippy::too_many_arguments)]
pub fn amplitude_mod_norm_capped(
    a: &SampledField,
    phi3: &Window,
    p: &[Exponent; 3],
    q: &[Exponent; 3],
    omega: &Weight,
    flavor: AmplitudeFlavor,
    strides: (usize, usize),
    cap: usize,
) -> Result<f64> {
    let g3 = *a.spec();
    let d = block_dim(&g3, 3)?;
    let v = lattice_stft(a, phi3, strides, cap)?;
    let shape = v.shape();
    let coords = v.coords();
    let dim6 = 6 * d;
    let mags: Vec<f64> = if omega.is_constant() {
        let c = omega.eval(&vec![0.0; omega.required_dim().max(dim6)])?;
        v.values().iter().map(|z| z.norm() * c).collect()
    } else {
        v.values()
            .par_iter()
            .enumerate()
            .map(|(flat, z)| {
                let mut rem = flat;
                let mut pt = vec![0.0; dim6];
                for k in (0..dim6).rev() {
                    pt[k] = coords[k][rem % shape[k]];
                    rem /= shape[k];
                }
                Ok(z.norm() * omega.eval(&pt)?)
            })
            .collect::<Result<Vec<f64>>>()?
    };
    drop(v);

    let (na, _) = (shape[0], shape[dim6 - 1]);
    let xs = lattice_indices(g3.n(), strides.0);
    let centre = xs.iter().position(|&i| i == g3.n() / 2).expect("origin is on the lattice");
    let xlen = na.pow(d as u32);
    let tail: usize = shape[2 * d..].iter().product();
    let mut sheared = vec![0.0f64; mags.len()];
    sheared.par_chunks_mut(xlen * tail).enumerate().for_each(|(x, chunk)| {
        let xi = unravel(x, na, d);
        for y in 0..xlen {
            let yi = unravel(y, na, d);
            let s: Vec<usize> = xi.iter().zip(&yi).map(|(&p, &q)| (p + q + na - centre) % na).collect();
            let src = (x * xlen + ravel(&s, na)) * tail;
            chunk[y * tail..(y + 1) * tail].copy_from_slice(&mags[src..src + tail]);
        }
    });
    drop(mags);

    let expand = |e: &[Exponent; 3]| -> Vec<Exponent> { e.iter().flat_map(|&x| std::iter::repeat_n(x, d)).collect() };
    let spec = modulation_flavor_spec(&expand(p), &expand(q), 3 * d, flavor, Weight::one(), v_cells(&g3, strides))?;
    let arr = ndarray::ArrayViewD::from_shape(ndarray::IxDyn(&shape), &sheared).expect("shape");
    mixed_norm_of_magnitudes(arr, &spec)
}

fn v_cells(g: &GridSpec, strides: (usize, usize)) -> (f64, f64) {
    (strides.0 as f64 * g.step(), strides.1 as f64 * g.freq_step())
}

/// Largest value of `ω₂(x,ξ) / (ω₁(z,ζ) ω(x, z, ζ+η, ξ-ζ-η, η, z-x) ϑ(η, z))`
/// over a uniform sweep of `[-R, R]^{5d}` with `points` samples per axis (`d = 1`).
pub fn weight_condition_ratio(
    omega: &Weight,
    omega1: &Weight,
    omega2: &Weight,
    theta: &Weight,
    radius: f64,
    points: usize,
) -> Result<f64> {
    let m = points.max(2);
    let axis: Vec<f64> = (0..m).map(|i| -radius + 2.0 * radius * i as f64 / (m - 1) as f64).collect();
    let worst = (0..m.pow(5))
        .into_par_iter()
        .map(|flat| {
            let idx = unravel(flat, m, 5);
            let (x, z, xi, eta, zeta) = (axis[idx[0]], axis[idx[1]], axis[idx[2]], axis[idx[3]], axis[idx[4]]);
            let num = omega2.ln_eval(&[x, xi])?;
            let den = omega1.ln_eval(&[z, zeta])?
                + omega.ln_eval(&[x, z, zeta + eta, xi - zeta - eta, eta, z - x])?
                + theta.ln_eval(&[eta, z])?;
            Ok(num - den)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(worst.exp())
}

/// Separable amplitude `Π g_i(t_i)` with `g(t) = e^{-(t-μ)²/(2σ²) + iκt}` and
/// parameters drawn from `(seed, member)`.
pub fn separable_gaussian_amplitude(grid: &GridSpec, seed: u64, member: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0xD134_2543_DE82_EF95) ^ member);
    let params: Vec<(f64, f64, f64)> = (0..grid.dim())
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.7..1.3), rng.random_range(-1.0..1.0)))
        .collect();
    SampledField::from_fn(*grid, |x| {
        x.iter()
            .zip(&params)
            .map(|(t, (mu, s, k))| Complex64::from_polar((-(t - mu) * (t - mu) / (2.0 * s * s)).exp(), k * t))
            .product()
    })
}

/// Sum of three complex Gaussian bumps in `(x, ξ)` with random centres in
/// `[-1, 1]^{2d}` and widths in `[0.8, 1.1]`, resolved to about `1e-7` at `N = 32`.
pub fn gaussian_symbol(grid: &GridSpec, seed: u64, member: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0xA076_1D64_78BD_642F) ^ member);
    let bumps: Vec<(Vec<f64>, f64, Complex64)> = (0..3)
        .map(|_| {
            let c: Vec<f64> = (0..grid.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w = rng.random_range(0.8..1.1);
            let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (c, w, amp)
        })
        .collect();
    SampledField::from_fn(*grid, |x| {
        bumps
            .iter()
            .map(|(c, w, amp)| {
                let r2: f64 = x.iter().zip(c).map(|(t, m)| (t - m) * (t - m)).sum();
                amp * (-r2 / (2.0 * w * w)).exp()
            })
            .sum()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplitudeSource {
    /// `extend_symbol` of the Gaussian `e^{-(x² + ξ²)/2}` with the unit Gaussian window.
    ExtendedGaussianSymbol,
    SeparableGaussian { seed: u64, member: u64 },
    Zero,
}

impl AmplitudeSource {
    pub fn sample(&self, grid3: &GridSpec) -> Result<SampledField> {
        match self {
            AmplitudeSource::ExtendedGaussianSymbol => {
                let d = block_dim(grid3, 3)?;
                let g2 = grid3.with_dim(2 * d)?;
                let a0 = SampledField::from_fn(g2, |x| {
                    Complex64::new((-0.5 * x.iter().map(|t| t * t).sum::<f64>()).exp(), 0.0)
                });
                extend_symbol(&a0, &Window::unit_gaussian(&grid3.with_dim(d)?))
            }
            AmplitudeSource::SeparableGaussian { seed, member } => Ok(separable_gaussian_amplitude(grid3, *seed, *member)),
            AmplitudeSource::Zero => Ok(SampledField::zeros(*grid3)),
        }
    }
}

fn default_cont_resolutions() -> Vec<usize> {
    vec![12, 16]
}

fn default_family() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuityConfig {
    pub amplitude: AmplitudeSource,
    /// Amplitude exponents of `𝓜^{p,∞,p,q,q,q}_{(ω)}`.
    pub p: Exponent,
    pub q: Exponent,
    /// Domain exponents; the target exponents follow from
    /// `1/p₂ - 1/p₁ = 1/q₂ - 1/q₁ = 1/p + min(0, 1/q - 1)`.
    pub p1: Exponent,
    pub q1: Exponent,
    #[serde(default)]
    pub omega: Weight,
    #[serde(default)]
    pub omega1: Weight,
    #[serde(default)]
    pub omega2: Weight,
    #[serde(default)]
    pub theta: Weight,
    #[serde(default = "default_cont_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default = "default_family")]
    pub family_size: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ContinuityConfig {
    pub fn target_exponents(&self) -> Result<(Exponent, Exponent)> {
        let shift = self.p.recip() + (self.q.recip() - 1.0).min(0.0);
        let p2 = self.p1.recip() + shift;
        let q2 = self.q1.recip() + shift;
        if p2 < 0.0 || q2 < 0.0 {
            return Err(Error::ExponentViolation(format!("target exponents 1/p2 = {p2}, 1/q2 = {q2} are negative")));
        }
        let inv = |v: f64| if v == 0.0 { Exponent::INF } else { Exponent(1.0 / v) };
        Ok((inv(p2), inv(q2)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityResolution {
    pub n: usize,
    pub amplitude_norm: f64,
    pub sup_ratio: f64,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub target_exponents: (Exponent, Exponent),
    pub weight_condition_ratio: f64,
    pub weight_condition_ratio_wide: f64,
    pub degenerate: bool,
    pub results: Vec<ContinuityResolution>,
    /// `R(N_last) / R(N_first)`, `1` for a degenerate amplitude.
    pub growth_factor: f64,
}

/// `R = max_f ‖Op(a) f‖_{M^{p₂,q₂}_{(ω₂)}} / (‖a‖_{𝓜^{p,∞,p,q,q,q}_{(ω)}} ‖f‖_{M^{p₁,q₁}_{(ω₁)}})` for `d = 1`.
pub fn continuity_experiment(config: &ContinuityConfig) -> Result<ContinuityReport> {
    let (p2, q2) = config.target_exponents()?;
    let wc = weight_condition_ratio(&config.omega, &config.omega1, &config.omega2, &config.theta, 4.0, 9)?;
    let wc_wide = weight_condition_ratio(&config.omega, &config.omega1, &config.omega2, &config.theta, 8.0, 9)?;
    let mut results = Vec::new();
    let mut degenerate = false;
    for &n in &config.resolutions {
        let g3 = GridSpec::self_dual(3, n)?;
        let g1 = g3.with_dim(1)?;
        let a = config.amplitude.sample(&g3)?;
        let a_norm = amplitude_mod_norm(
            &a,
            &Window::gaussian(&g3),
            &[config.p, Exponent::INF, config.p],
            &[config.q; 3],
            &config.omega,
            Flavor::M,
            (1, 1),
        )?;
        if a_norm == 0.0 {
            degenerate = true;
            results.push(ContinuityResolution { n, amplitude_norm: 0.0, sup_ratio: 0.0, ratios: Vec::new() });
            continue;
        }
        let op = op_from_amplitude(&a)?;
        let phi = Window::gaussian(&g1);
        let ratios = (0..config.family_size)
            .into_par_iter()
            .map(|m| {
                let f = crate::trace::random_gabor_field(&g1, config.seed, m as u64);
                let top = modulation_norm(&op.apply(&f)?, &phi, &[p2], &[q2], &config.omega2, Flavor::M, (1, 1))?;
                let bottom = modulation_norm(&f, &phi, &[config.p1], &[config.q1], &config.omega1, Flavor::M, (1, 1))?;
                Ok(top / (a_norm * bottom))
            })
            .collect::<Result<Vec<f64>>>()?;
        let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
        results.push(ContinuityResolution { n, amplitude_norm: a_norm, sup_ratio, ratios });
    }
    let growth_factor = if degenerate || results.is_empty() {
        1.0
    } else {
        results.last().expect("nonempty").sup_ratio / results[0].sup_ratio
    };
    Ok(ContinuityReport {
        target_exponents: (p2, q2),
        weight_condition_ratio: wc,
        weight_condition_ratio_wide: wc_wide,
        degenerate,
        results,
        growth_factor,
    })
}
