//! The trace map `Tr_z f(x₁, x₃) = f(x₁, z, x₃)`, its STFT inversion identity,
//! the tensor-extension right inverse and the boundedness experiment.
//!
//! Ambient axes are ordered `(x₁, x₂, x₃)` with block sizes `(d₁, d₂, d₃)`;
//! the trace lives on the `d₁ + d₃` axes `x₀ = (x₁, x₃)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{modulation_norm, stft, Window};
use crate::lattice::{ravel, unravel, GridSpec, SampledField};
use crate::mixed_norm::{Exponent, Flavor};
use crate::weights::{trace_weight_constant, TraceWeightReport, Weight};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimSplit {
    pub d1: usize,
    pub d2: usize,
    pub d3: usize,
    pub z: Vec<f64>,
}

impl DimSplit {
    pub fn new(d1: usize, d2: usize, d3: usize, z: Vec<f64>) -> Result<Self> {
        if z.len() != d2 {
            return Err(Error::DimensionMismatch { expected: d2, got: z.len() });
        }
        if d1 + d3 == 0 || d2 == 0 {
            return Err(Error::Config("trace needs d2 >= 1 and d1 + d3 >= 1".into()));
        }
        Ok(DimSplit { d1, d2, d3, z })
    }

    /// `z = 0`.
    pub fn at_origin(d1: usize, d2: usize, d3: usize) -> Result<Self> {
        DimSplit::new(d1, d2, d3, vec![0.0; d2])
    }

    pub fn ambient_dim(&self) -> usize {
        self.d1 + self.d2 + self.d3
    }

    pub fn trace_dim(&self) -> usize {
        self.d1 + self.d3
    }

    /// Grid indices of `z` and the largest snap distance.
    pub fn z_indices(&self, grid: &GridSpec) -> (Vec<usize>, f64) {
        let mut dist: f64 = 0.0;
        let idx = self
            .z
            .iter()
            .map(|&v| {
                let (i, d) = grid.index_of(v);
                dist = dist.max(d);
                i
            })
            .collect();
        (idx, dist)
    }

    fn check(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: grid.dim() });
        }
        Ok(())
    }

    /// Splits an ambient multi-index into `(x₀, x₂)` parts.
    fn split_index(&self, idx: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut x0 = idx[..self.d1].to_vec();
        x0.extend_from_slice(&idx[self.d1 + self.d2..]);
        (x0, idx[self.d1..self.d1 + self.d2].to_vec())
    }

    fn join_index(&self, x0: &[usize], x2: &[usize]) -> Vec<usize> {
        let mut idx = x0[..self.d1].to_vec();
        idx.extend_from_slice(x2);
        idx.extend_from_slice(&x0[self.d1..]);
        idx
    }
}

/// `Tr_z f`; `z` must lie on the grid.
pub fn trace_map(f: &SampledField, split: &DimSplit) -> Result<SampledField> {
    trace_map_with(f, split, true)
}

/// `Tr_z f`; with `strict = false`, `z` is snapped to the nearest grid point.
pub fn trace_map_with(f: &SampledField, split: &DimSplit, strict: bool) -> Result<SampledField> {
    let g = *f.spec();
    split.check(&g)?;
    let (zi, dist) = split.z_indices(&g);
    if strict && dist > 1e-12 * g.step() {
        return Err(Error::ZOffGrid(dist));
    }
    let g0 = g.with_dim(split.trace_dim())?;
    let n = g.n();
    let values = (0..g0.len())
        .map(|flat| f.values()[ravel(&split.join_index(&unravel(flat, n, g0.dim()), &zi), n)])
        .collect();
    SampledField::new(g0, values)
}

/// `f(x₁, x₂, x₃) = f₀(x₁, x₃) φ(x₂ - z)`; the window should satisfy `φ(0) = 1`.
pub fn tensor_extension(f0: &SampledField, phi: &Window, split: &DimSplit) -> Result<SampledField> {
    let g0 = *f0.spec();
    if g0.dim() != split.trace_dim() {
        return Err(Error::DimensionMismatch { expected: split.trace_dim(), got: g0.dim() });
    }
    if phi.grid().dim() != split.d2 || phi.grid().n() != g0.n() || phi.grid().step() != g0.step() {
        return Err(Error::GridMismatch("extension window grid".into()));
    }
    let (zi, dist) = split.z_indices(&g0);
    if dist > 1e-12 * g0.step() {
        return Err(Error::ZOffGrid(dist));
    }
    let shifted = phi.translated(&zi);
    let g = g0.with_dim(split.ambient_dim())?;
    let n = g.n();
    let values = (0..g.len())
        .map(|flat| {
            let (x0, x2) = split.split_index(&unravel(flat, n, g.dim()));
            f0.values()[ravel(&x0, n)] * shifted[ravel(&x2, n)]
        })
        .collect();
    SampledField::new(g, values)
}

/// `φ₀ ⊗ φ₂` with the `φ₂` axes placed in the `x₂` block.
pub fn split_window(phi0: &Window, phi2: &Window, split: &DimSplit) -> Result<Window> {
    let g0 = *phi0.grid();
    let g = g0.with_dim(split.ambient_dim())?;
    let n = g.n();
    let values = (0..g.len())
        .map(|flat| {
            let (x0, x2) = split.split_index(&unravel(flat, n, g.dim()));
            phi0.field().values()[ravel(&x0, n)] * phi2.field().values()[ravel(&x2, n)]
        })
        .collect();
    Window::custom(SampledField::new(g, values)?)
}

/// Largest deviation between `V_{φ₀}(Tr_z f)` and its reconstruction from `V_φ f`,
/// relative to `max |V_{φ₀}(Tr_z f)|`.
///
/// The reconstruction is
/// `(2π)^{-d₂/2} ‖φ₂‖^{-2} Σ_{y,η} V_φ f(x₁,y,x₃,ξ₁,η,ξ₃) φ₂(z-y) e^{+i z·η} h^{d₂} Δξ^{d₂}`.
pub fn stft_trace_identity_residual(f: &SampledField, split: &DimSplit, phi0: &Window, phi2: &Window) -> Result<f64> {
    let g = *f.spec();
    split.check(&g)?;
    let tr = trace_map(f, split)?;
    let lhs = stft(&tr, phi0)?;
    let phi = split_window(phi0, phi2, split)?;
    let v = stft(f, &phi)?;

    let n = g.n();
    let dim = g.dim();
    let d0 = split.trace_dim();
    let d2 = split.d2;
    let (zi, _) = split.z_indices(&g);
    let zs: Vec<f64> = zi.iter().map(|&i| g.coord(i)).collect();
    let win2: Vec<Complex64> = (0..n.pow(d2 as u32))
        .map(|yflat| {
            let y = unravel(yflat, n, d2);
            let src: Vec<usize> = zi.iter().zip(&y).map(|(&z, &yy)| (z + n + n / 2 - yy) % n).collect();
            phi2.field().values()[ravel(&src, n)]
        })
        .collect();
    let phases: Vec<Complex64> = (0..n.pow(d2 as u32))
        .map(|eflat| {
            let e = unravel(eflat, n, d2);
            let dot: f64 = e.iter().zip(&zs).map(|(&k, z)| g.freq(k) * z).sum();
            Complex64::from_polar(1.0, dot)
        })
        .collect();
    let prefactor = (2.0 * PI).powf(-(d2 as f64) / 2.0) / phi2.l2_norm().powi(2)
        * (g.step() * g.freq_step()).powi(d2 as i32);
    let len0 = n.pow(d0 as u32);
    let amb = n.pow(dim as u32);
    let lhs_vals = lhs.values();
    let worst: Vec<(f64, f64)> = (0..len0)
        .into_par_iter()
        .map(|x0flat| {
            let x0 = unravel(x0flat, n, d0);
            let mut diff: f64 = 0.0;
            let mut top: f64 = 0.0;
            for xi0flat in 0..len0 {
                let xi0 = unravel(xi0flat, n, d0);
                let mut acc = ZERO;
                for (yflat, w) in win2.iter().enumerate() {
                    let xrow = ravel(&split.join_index(&x0, &unravel(yflat, n, d2)), n);
                    for (eflat, ph) in phases.iter().enumerate() {
                        let col = ravel(&split.join_index(&xi0, &unravel(eflat, n, d2)), n);
                        acc += v.values()[xrow * amb + col] * w * ph;
                    }
                }
                let l = lhs_vals[x0flat * len0 + xi0flat];
                diff = diff.max((acc * prefactor - l).norm());
                top = top.max(l.norm());
            }
            (diff, top)
        })
        .collect();
    let diff = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let top = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    Ok(if top > 0.0 { diff / top } else { diff })
}

/// Exponent rule for the trace theorem with equal exponents on all blocks:
/// `θ ≥ d (max(1/p, 1/q, 1) - 1/q) = d/r`, strictly when `min(p, 1) < q`.
///
/// The `1` inside the max is what makes `⟨ξ₂⟩^{-θ}` lie in `L^r`; without it
/// `p = q = 2` would admit every `θ > 0`, contradicting the Sobolev case `θ > d/2`.
pub fn theta_exponent_admissible(p: Exponent, q: Exponent, d: usize, theta: f64) -> bool {
    let bound = d as f64 * (p.recip().max(q.recip()).max(1.0) - q.recip());
    if p.value().min(1.0) < q.value() {
        theta > bound
    } else {
        theta >= bound
    }
}

/// Largest `r` with `max(1/p₀, 1/q₁, 1/q₂, 1) - 1/q₂ ≤ 1/r` for every `x₂` frequency axis.
pub fn trace_r_exponent(p: &[Exponent], q: &[Exponent], split: &DimSplit) -> Exponent {
    let p0 = p[..split.d1].iter().chain(&p[split.d1 + split.d2..]);
    let q1 = &q[..split.d1];
    let q2 = &q[split.d1..split.d1 + split.d2];
    let m = p0.chain(q1).chain(q2).map(|e| e.recip()).fold(1.0f64, f64::max);
    let inv = q2.iter().map(|e| m - e.recip()).fold(0.0f64, f64::max);
    if inv == 0.0 {
        Exponent::INF
    } else {
        Exponent(1.0 / inv)
    }
}

fn default_true() -> bool {
    true
}

fn default_resolutions() -> Vec<usize> {
    vec![16, 32]
}

fn default_random() -> usize {
    40
}

fn default_adversarial() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceExperimentConfig {
    pub split: DimSplit,
    /// Ambient exponents, one per axis; the trace exponents drop the `x₂` block.
    pub p: Vec<Exponent>,
    pub q: Vec<Exponent>,
    /// Weight on the `2(d₁+d₂+d₃)` ambient phase-space axes `(x, ξ)`.
    pub omega: Weight,
    /// Weight on the `2(d₁+d₃)` trace phase-space axes `(x₀, ξ₀)`.
    pub omega0: Weight,
    /// `ϑ` on `(ξ₂, ξ₃)`.
    pub theta: Weight,
    /// Overrides the largest admissible `r`.
    #[serde(default)]
    pub r: Option<Exponent>,
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default = "default_random")]
    pub random_members: usize,
    #[serde(default = "default_adversarial")]
    pub adversarial_members: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub enforce_theta: bool,
}

impl TraceExperimentConfig {
    /// `p = q = 2`, `ω = ⟨(ξ₂, ξ₃)⟩^s`, `ω₀ = ⟨ξ₃⟩^{s₀}`, `ϑ = ⟨(ξ₂, ξ₃)⟩^{-s} ⟨ξ₃⟩^{s₀}`.
    pub fn sobolev(split: DimSplit, s: f64, s0: f64) -> Self {
        let dim = split.ambient_dim();
        let d0 = split.trace_dim();
        let two = vec![Exponent(2.0); dim];
        let hi = split.d2 + split.d3;
        let omega = Weight::lift(dim + split.d1, hi, Weight::poly(s));
        let omega0 = if split.d3 == 0 { Weight::one() } else { Weight::lift(d0 + split.d1, split.d3, Weight::poly(s0)) };
        let theta = if split.d3 == 0 {
            Weight::poly(-s)
        } else {
            Weight::product(vec![Weight::poly(-s), Weight::lift(split.d2, split.d3, Weight::poly(s0))])
        };
        TraceExperimentConfig {
            split,
            p: two.clone(),
            q: two,
            omega,
            omega0,
            theta,
            r: None,
            resolutions: default_resolutions(),
            random_members: default_random(),
            adversarial_members: default_adversarial(),
            seed: 0,
            enforce_theta: true,
        }
    }

    fn trace_exponents(&self) -> (Vec<Exponent>, Vec<Exponent>) {
        let s = &self.split;
        let drop = |v: &[Exponent]| -> Vec<Exponent> { v[..s.d1].iter().chain(&v[s.d1 + s.d2..]).copied().collect() };
        (drop(&self.p), drop(&self.q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionResult {
    pub n: usize,
    pub step: f64,
    /// `max_f ‖Tr_z f‖ / ‖f‖` over the family.
    pub sup_ratio: f64,
    pub argmax: usize,
    pub ratios: Vec<f64>,
    /// `‖f₀‖ / ‖f₀ ⊗ φ‖` for the tensor-extension member.
    pub extension_ratio: f64,
    /// `Tr_z (f₀ ⊗ φ) = f₀` bit for bit.
    pub right_inverse_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceExperimentReport {
    pub theta: TraceWeightReport,
    pub results: Vec<ResolutionResult>,
    /// `R(N_last) / R(N_first)`.
    pub growth_factor: f64,
}

/// Sum of Gabor atoms with random coefficients on a fixed physical lattice,
/// so that the same function is sampled at every resolution.
pub fn random_gabor_field(grid: &GridSpec, seed: u64, member: u64) -> SampledField {
    let dim = grid.dim();
    let per_axis: i64 = if dim <= 2 { 2 } else { 1 };
    let side = (2 * per_axis + 1) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ member);
    let atoms: Vec<(Vec<f64>, Vec<f64>, Complex64)> = (0..side.pow(2 * dim as u32))
        .map(|flat| {
            let idx = unravel(flat, side, 2 * dim);
            let c: Vec<f64> = idx.iter().map(|&i| (i as i64 - per_axis) as f64).collect();
            let env = (-c.iter().map(|t| t * t).sum::<f64>() / 8.0).exp();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            (c[..dim].to_vec(), c[dim..].to_vec(), Complex64::new(re, im) * env)
        })
        .collect();
    SampledField::from_fn(*grid, |x| {
        atoms
            .iter()
            .map(|(cx, cxi, a)| {
                let r2: f64 = x.iter().zip(cx).map(|(t, c)| (t - c) * (t - c)).sum();
                let ph: f64 = x.iter().zip(cxi).map(|(t, k)| t * k).sum();
                a * Complex64::from_polar((-0.5 * r2).exp(), ph)
            })
            .sum()
    })
}

/// Gaussian in `x₀`, narrow in `x₂` (width `width_steps · h`) and modulated at
/// half the largest `x₂` frequency.
pub fn adversarial_field(grid: &GridSpec, split: &DimSplit, width_steps: f64) -> SampledField {
    let w = width_steps * grid.step();
    let k = grid.freq(grid.n() - 1) / 2.0;
    SampledField::from_fn(*grid, |x| {
        let mut r0 = 0.0;
        let mut r2 = 0.0;
        let mut ph = 0.0;
        for (i, t) in x.iter().enumerate() {
            if i >= split.d1 && i < split.d1 + split.d2 {
                r2 += t * t;
                ph += k * t;
            } else {
                r0 += t * t;
            }
        }
        Complex64::from_polar((-0.5 * r0 - 0.5 * r2 / (w * w)).exp(), ph)
    })
}

fn all_grid_points_on_grid(grid: &GridSpec, split: &DimSplit) -> Result<()> {
    let (_, dist) = split.z_indices(grid);
    if dist > 1e-12 * grid.step() {
        return Err(Error::ZOffGrid(dist));
    }
    Ok(())
}

/// Measures `R = max_f ‖Tr_z f‖_{M^{p₀,q₀}_{(ω₀)}} / ‖f‖_{M^{p,q}_{(ω)}}` at each resolution.
pub fn trace_bound_experiment(config: &TraceExperimentConfig) -> Result<TraceExperimentReport> {
    let split = &config.split;
    let dim = split.ambient_dim();
    if config.p.len() != dim || config.q.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: config.p.len().min(config.q.len()) });
    }
    if config.resolutions.is_empty() {
        return Err(Error::Config("at least one resolution is required".into()));
    }
    let r = config.r.unwrap_or_else(|| trace_r_exponent(&config.p, &config.q, split));
    let n_last = *config.resolutions.last().expect("nonempty");
    let xi2 = GridSpec::self_dual(split.d2, n_last)?;
    let xi3 = if split.d3 > 0 { Some(GridSpec::self_dual(split.d3, n_last)?) } else { None };
    let theta = trace_weight_constant(&config.theta, r, xi3.as_ref(), &xi2)?;
    if config.enforce_theta && !theta.finite {
        return Err(Error::InfiniteThetaConstant);
    }
    let (p0, q0) = config.trace_exponents();

    let mut results = Vec::with_capacity(config.resolutions.len());
    for &n in &config.resolutions {
        let g = GridSpec::self_dual(dim, n)?;
        all_grid_points_on_grid(&g, split)?;
        let g0 = g.with_dim(split.trace_dim())?;
        let phi = Window::gaussian(&g);
        let phi0 = Window::gaussian(&g0);
        let norm_pair = |f: &SampledField| -> Result<f64> {
            let tr = trace_map(f, split)?;
            let top = modulation_norm(&tr, &phi0, &p0, &q0, &config.omega0, Flavor::M, (1, 1))?;
            let bottom = modulation_norm(f, &phi, &config.p, &config.q, &config.omega, Flavor::M, (1, 1))?;
            Ok(if bottom > 0.0 { top / bottom } else { 0.0 })
        };
        let total = config.random_members + config.adversarial_members;
        let ratios = (0..total)
            .into_par_iter()
            .map(|m| {
                let f = if m < config.random_members {
                    random_gabor_field(&g, config.seed, m as u64)
                } else {
                    let j = (m - config.random_members) as f64;
                    let span = config.adversarial_members.max(2) as f64 - 1.0;
                    adversarial_field(&g, split, 1.5 + 1.5 * j / span)
                };
                norm_pair(&f)
            })
            .collect::<Result<Vec<f64>>>()?;

        let f0 = random_gabor_field(&g0, config.seed, u64::MAX);
        let ext_window = Window::unit_gaussian(&g.with_dim(split.d2)?);
        let ext = tensor_extension(&f0, &ext_window, split)?;
        let right_inverse_exact = trace_map(&ext, split)? == f0;
        let extension_ratio = modulation_norm(&f0, &phi0, &p0, &q0, &config.omega0, Flavor::M, (1, 1))?
            / modulation_norm(&ext, &phi, &config.p, &config.q, &config.omega, Flavor::M, (1, 1))?;

        let (argmax, sup_ratio) = ratios
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
        results.push(ResolutionResult {
            n,
            step: g.step(),
            sup_ratio,
            argmax,
            ratios,
            extension_ratio,
            right_inverse_exact,
        });
    }
    let growth_factor = results.last().expect("nonempty").sup_ratio / results[0].sup_ratio;
    Ok(TraceExperimentReport { theta, results, growth_factor })
}
