//! Weighted mixed quasi-norms `ℓ^p_{σ,(ω)}`, circular convolution and the
//! Young-type inequalities used by the trace estimates.
//!
//! # Axis order
//!
//! A [`MixedNormSpec`] carries one exponent per *norm axis* and a permutation
//! `σ`. Norm axis `k` consumes original array axis `σ⁻¹(k)`; norm axis 0 is
//! contracted first. For the 2×2 array `[[1, 2], [3, 4]]` with `p = (1, ∞)`:
//!
//! * `σ = id`: axis 0 (rows index) is summed first, giving column sums
//!   `(4, 6)`, then the supremum `6`;
//! * `σ = (0 1)`: axis 1 is summed first, giving row sums `(3, 7)`, then `7`.
//!
//! Finite exponents carry the per-axis cell measure as `cell^{1/p}`; the
//! exponent `∞` is a plain supremum with no measure factor.

use ndarray::{ArrayViewD, IxDyn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::weights::Weight;

/// A Lebesgue exponent in `(0, ∞]`; `f64::INFINITY` encodes `∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INF: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        let e = Exponent(p);
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0 > 0.0 && !self.0.is_nan() {
            Ok(())
        } else {
            Err(Error::InvalidExponent(self.0))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0 == f64::INFINITY
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn recip(&self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    pub fn min_one(self) -> Exponent {
        Exponent(self.0.min(1.0))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent(v)),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(Exponent::INF),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        }
    }
}

pub fn exponents(values: &[f64]) -> Result<Vec<Exponent>> {
    values.iter().map(|&p| Exponent::new(p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub exponents: Vec<Exponent>,
    /// `permutation[j] = σ(j)`, zero based.
    pub permutation: Vec<usize>,
    pub weight: Weight,
    /// Cell measure attached to each original array axis.
    pub cells: Vec<f64>,
}

impl MixedNormSpec {
    pub fn new(exponents: Vec<Exponent>, permutation: Vec<usize>, weight: Weight, cell: f64) -> Self {
        let m = exponents.len();
        MixedNormSpec { exponents, permutation, weight, cells: vec![cell; m] }
    }

    /// Identity permutation, unit weight and unit cells.
    pub fn plain(exponents: Vec<Exponent>) -> Self {
        let m = exponents.len();
        MixedNormSpec::new(exponents, (0..m).collect(), Weight::one(), 1.0)
    }

    pub fn with_cells(mut self, cells: Vec<f64>) -> Self {
        self.cells = cells;
        self
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.rank();
        for e in &self.exponents {
            e.validate()?;
        }
        if self.permutation.len() != m || self.cells.len() != m {
            return Err(Error::RankMismatch { expected: m, got: self.permutation.len().min(self.cells.len()) });
        }
        let mut seen = vec![false; m];
        for &s in &self.permutation {
            if s >= m || seen[s] {
                return Err(Error::Config(format!("{:?} is not a permutation", self.permutation)));
            }
            seen[s] = true;
        }
        if self.cells.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Config("cell measures must be positive".into()));
        }
        self.weight.validate()
    }

    /// `order[k] = σ⁻¹(k)`: the original axis consumed by norm axis `k`.
    pub fn axis_order(&self) -> Vec<usize> {
        let mut inv = vec![0; self.rank()];
        for (j, &s) in self.permutation.iter().enumerate() {
            inv[s] = j;
        }
        inv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// Modulation space: spatial axes first.
    M,
    /// Wiener amalgam: frequency axes first.
    W,
}

/// Spec for `L^{p,q}_{(ω)}` (flavor `M`) or `L^{p,q}_{*,(ω)}` (flavor `W`) on `2d` axes.
pub fn modulation_flavor_spec(
    p: &[Exponent],
    q: &[Exponent],
    d: usize,
    flavor: Flavor,
    weight: Weight,
    cells: (f64, f64),
) -> Result<MixedNormSpec> {
    if p.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() });
    }
    if q.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: q.len() });
    }
    let mut cell_vec = vec![cells.0; d];
    cell_vec.extend(std::iter::repeat_n(cells.1, d));
    let (exps, perm): (Vec<Exponent>, Vec<usize>) = match flavor {
        Flavor::M => (p.iter().chain(q).copied().collect(), (0..2 * d).collect()),
        Flavor::W => (q.iter().chain(p).copied().collect(), (0..2 * d).map(|j| (j + d) % (2 * d)).collect()),
    };
    Ok(MixedNormSpec { exponents: exps, permutation: perm, weight, cells: cell_vec })
}

/// Neumaier-compensated accumulator.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Contracts axis 0 of a row-major `shape` buffer with the `ℓ^p` quasi-norm.
fn contract_first(cur: &[f64], shape: &[usize], p: Exponent, cell: f64) -> Vec<f64> {
    let n0 = shape[0];
    let inner: usize = shape[1..].iter().product();
    let mut max = vec![0.0f64; inner];
    for i in 0..n0 {
        let row = &cur[i * inner..(i + 1) * inner];
        for (m, &v) in max.iter_mut().zip(row) {
            if v > *m {
                *m = v;
            }
        }
    }
    if p.is_infinite() {
        return max;
    }
    let pv = p.value();
    let mut acc = vec![Compensated::default(); inner];
    for i in 0..n0 {
        let row = &cur[i * inner..(i + 1) * inner];
        for ((a, &v), &m) in acc.iter_mut().zip(row).zip(&max) {
            if m > 0.0 && v > 0.0 {
                a.add((v / m).powf(pv));
            }
        }
    }
    acc.iter()
        .zip(&max)
        .map(|(a, &m)| if m > 0.0 { m * (a.value() * cell).powf(1.0 / pv) } else { 0.0 })
        .collect()
}

/// Mixed quasi-norm of nonnegative, already weighted magnitudes.
pub fn mixed_norm_of_magnitudes(mags: ArrayViewD<'_, f64>, spec: &MixedNormSpec) -> Result<f64> {
    spec.validate()?;
    if mags.ndim() != spec.rank() {
        return Err(Error::RankMismatch { expected: spec.rank(), got: mags.ndim() });
    }
    if mags.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let order = spec.axis_order();
    let permuted = mags.permuted_axes(IxDyn(&order));
    let mut shape: Vec<usize> = permuted.shape().to_vec();
    let mut cur: Vec<f64> = permuted.iter().copied().collect();
    for k in 0..spec.rank() {
        cur = contract_first(&cur, &shape, spec.exponents[k], spec.cells[order[k]]);
        shape.remove(0);
    }
    Ok(cur[0])
}

/// `‖F‖_{ℓ^p_{σ,(ω)}}` for a complex array whose axis `j` carries `coords[j]`.
pub fn mixed_quasi_norm(values: ArrayViewD<'_, Complex64>, coords: &[Vec<f64>], spec: &MixedNormSpec) -> Result<f64> {
    if values.ndim() != spec.rank() {
        return Err(Error::RankMismatch { expected: spec.rank(), got: values.ndim() });
    }
    if coords.len() != spec.rank() || coords.iter().zip(values.shape()).any(|(c, &n)| c.len() != n) {
        return Err(Error::ShapeMismatch("coordinate vectors do not match array shape".into()));
    }
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    spec.weight.validate()?;
    let shape = values.shape().to_vec();
    let mags: Vec<f64> = if spec.weight.is_constant() {
        let c = spec.weight.eval(&vec![0.0; spec.weight.required_dim().max(spec.rank())])?;
        values.iter().map(|v| v.norm() * c).collect()
    } else {
        let flat: Vec<Complex64> = values.iter().copied().collect();
        flat.par_iter()
            .enumerate()
            .map(|(i, v)| {
                let point = point_of(i, &shape, coords);
                Ok(v.norm() * spec.weight.eval(&point)?)
            })
            .collect::<Result<Vec<f64>>>()?
    };
    let arr = ArrayViewD::from_shape(IxDyn(&shape), &mags).expect("shape matches");
    mixed_norm_of_magnitudes(arr, spec)
}

fn point_of(mut flat: usize, shape: &[usize], coords: &[Vec<f64>]) -> Vec<f64> {
    let mut p = vec![0.0; shape.len()];
    for k in (0..shape.len()).rev() {
        p[k] = coords[k][flat % shape[k]];
        flat /= shape[k];
    }
    p
}

fn unravel_shape(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

fn ravel_shape(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Circular convolution `(f * g)(n) = Σ_m f(m) g(n - m mod N)` per axis.
pub fn discrete_convolution(
    f: ArrayViewD<'_, Complex64>,
    g: ArrayViewD<'_, Complex64>,
) -> Result<ndarray::ArrayD<Complex64>> {
    if f.shape() != g.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", f.shape(), g.shape())));
    }
    let shape = f.shape().to_vec();
    let fv: Vec<Complex64> = f.iter().copied().collect();
    let gv: Vec<Complex64> = g.iter().copied().collect();
    let len = fv.len();
    let out: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|n| {
            let ni = unravel_shape(n, &shape);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut diff = vec![0; shape.len()];
            for (m, fm) in fv.iter().enumerate() {
                if *fm == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mi = unravel_shape(m, &shape);
                for k in 0..shape.len() {
                    diff[k] = (ni[k] + shape[k] - mi[k]) % shape[k];
                }
                acc += fm * gv[ravel_shape(&diff, &shape)];
            }
            acc
        })
        .collect();
    Ok(ndarray::ArrayD::from_shape_vec(IxDyn(&shape), out).expect("shape matches"))
}

/// Unit-spaced, nonnegative lattice coordinates `0, 1, …, n-1` per axis.
fn index_coords(shape: &[usize]) -> Vec<Vec<f64>> {
    shape.iter().map(|&n| (0..n).map(|i| i as f64).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `max ω(x+y) / (ω(x) v(y))` over all lattice pairs, sums taken modulo the period.
    pub precondition_ratio: f64,
    pub precondition_ok: bool,
}

impl YoungReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Both sides of `‖f₁ * f₂‖_{ℓ^p_{(ω)}} ≤ ‖f₁‖_{ℓ^p_{(ω)}} ‖f₂‖_{ℓ^r_{(v)}}`, `r = min(p, 1)`.
///
/// The arrays live on the periodic lattice with coordinates `0, 1, …, N-1` on
/// every axis; the precondition `ω(x+y) ≤ ω(x) v(y)` is swept over all pairs
/// with the sum reduced modulo `N`.
pub fn young_check(
    f1: ArrayViewD<'_, Complex64>,
    f2: ArrayViewD<'_, Complex64>,
    p: &[Exponent],
    omega: &Weight,
    v: &Weight,
) -> Result<YoungReport> {
    let conv = discrete_convolution(f1.view(), f2.view())?;
    let shape = f1.shape().to_vec();
    let m = shape.len();
    if p.len() != m {
        return Err(Error::RankMismatch { expected: p.len(), got: m });
    }
    let coords = index_coords(&shape);
    let spec_p = MixedNormSpec::new(p.to_vec(), (0..m).collect(), omega.clone(), 1.0);
    let r = p.iter().fold(Exponent(1.0), |acc, e| if e.0 < acc.0 { *e } else { acc });
    let spec_r = MixedNormSpec::new(vec![r; m], (0..m).collect(), v.clone(), 1.0);
    let lhs = mixed_quasi_norm(conv.view(), &coords, &spec_p)?;
    let rhs = mixed_quasi_norm(f1.view(), &coords, &spec_p)? * mixed_quasi_norm(f2.view(), &coords, &spec_r)?;

    let total: usize = shape.iter().product();
    let mut worst = f64::NEG_INFINITY;
    for a in 0..total {
        let ai = unravel_shape(a, &shape);
        let x: Vec<f64> = ai.iter().map(|&i| i as f64).collect();
        let lw = omega.ln_eval(&x)?;
        for b in 0..total {
            let bi = unravel_shape(b, &shape);
            let y: Vec<f64> = bi.iter().map(|&i| i as f64).collect();
            let s: Vec<f64> = ai.iter().zip(&bi).zip(&shape).map(|((&i, &j), &n)| ((i + j) % n) as f64).collect();
            worst = worst.max(omega.ln_eval(&s)? - lw - v.ln_eval(&y)?);
        }
    }
    let ratio = worst.exp();
    Ok(YoungReport { lhs, rhs, precondition_ratio: ratio, precondition_ok: ratio <= 1.0 + 1e-12 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpConvolutionReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `‖e^{-r|·|}‖_{ℓ^{min(p,1)}_{(v)}}` on the base kernel box.
    pub constant: f64,
    /// The same constant on boxes of half-width `K, 2K, 4K` lattice points.
    pub extension_constants: Vec<f64>,
    pub admissible: bool,
}

fn centered_box(d: usize, half: usize) -> Vec<Vec<i64>> {
    let m = 2 * half + 1;
    (0..m.pow(d as u32))
        .map(|flat| crate::lattice::unravel(flat, m, d).into_iter().map(|i| i as i64 - half as i64).collect())
        .collect()
}

fn exp_kernel_constant(d: usize, half: usize, spacing: f64, r: f64, rho: f64, v: &Weight) -> Result<f64> {
    let mut acc = Compensated::default();
    for pt in centered_box(d, half) {
        let y: Vec<f64> = pt.iter().map(|&i| i as f64 * spacing).collect();
        let ln = -r * y.iter().map(|t| t * t).sum::<f64>().sqrt() + v.ln_eval(&y)?;
        acc.add((rho * ln).exp());
    }
    Ok(acc.value().powf(1.0 / rho))
}

/// Both sides of `‖f * e^{-r|·|}‖_{ℓ^p_{(ω)}} ≤ C ‖f‖_{ℓ^p_{(ω)}}` on `εℤ^d`.
///
/// `f` has shape `(2M+1)^d` with coordinates `(i - M) ε`. The convolution is
/// linear (not periodic); the kernel is truncated to a box of half-width
/// `K = max(M, ⌈10/ε⌉)` points. `C` uses the analytic submultiplicative partner
/// `v` of `ω`, and is admissible when it changes by at most 5% under each of
/// two doublings of `K`.
pub fn exp_convolution_check(
    f: ArrayViewD<'_, Complex64>,
    spacing: f64,
    p: &[Exponent],
    omega: &Weight,
    r: f64,
) -> Result<ExpConvolutionReport> {
    if r <= 0.0 {
        return Err(Error::NonPositiveR(r));
    }
    let d = f.ndim();
    if p.len() != d {
        return Err(Error::RankMismatch { expected: p.len(), got: d });
    }
    let n = f.shape()[0];
    if n % 2 == 0 || f.shape().iter().any(|&s| s != n) {
        return Err(Error::ShapeMismatch("expected an odd, cubic (2M+1)^d array".into()));
    }
    let half = n / 2;
    let k = half.max((10.0 / spacing).ceil() as usize);
    let v = omega.submultiplicative_partner();
    let rho = p.iter().fold(1.0f64, |acc, e| acc.min(e.0));

    let extension_constants = [k, 2 * k, 4 * k]
        .iter()
        .map(|&kk| exp_kernel_constant(d, kk, spacing, r, rho, &v))
        .collect::<Result<Vec<f64>>>()?;
    let constant = extension_constants[0];
    let admissible = extension_constants.iter().all(|c| c.is_finite())
        && extension_constants.windows(2).all(|w| (w[1] - w[0]).abs() <= 0.05 * w[0]);

    let out_half = half + k;
    let out_n = 2 * out_half + 1;
    let out_shape = vec![out_n; d];
    let fv: Vec<(Vec<i64>, Complex64)> = centered_box(d, half)
        .into_iter()
        .zip(f.iter().copied())
        .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
        .collect();
    let out: Vec<Complex64> = centered_box(d, out_half)
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, fm) in &fv {
                let diff: Vec<i64> = x.iter().zip(m).map(|(a, b)| a - b).collect();
                if diff.iter().all(|t| t.unsigned_abs() as usize <= k) {
                    let dist = diff.iter().map(|&t| (t as f64 * spacing).powi(2)).sum::<f64>().sqrt();
                    acc += fm * (-r * dist).exp();
                }
            }
            acc
        })
        .collect();
    let out_arr = ndarray::ArrayD::from_shape_vec(IxDyn(&out_shape), out).expect("shape");
    let coords_out: Vec<Vec<f64>> = (0..d).map(|_| (0..out_n).map(|i| (i as f64 - out_half as f64) * spacing).collect()).collect();
    let coords_in: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|i| (i as f64 - half as f64) * spacing).collect()).collect();
    let spec = MixedNormSpec::new(p.to_vec(), (0..d).collect(), omega.clone(), 1.0);
    let lhs = mixed_quasi_norm(out_arr.view(), &coords_out, &spec)?;
    let rhs = constant * mixed_quasi_norm(f, &coords_in, &spec)?;
    Ok(ExpConvolutionReport { lhs, rhs, constant, extension_constants, admissible })
}

/// Literal nested-loop evaluation of the mixed quasi-norm, kept independent of
/// the contraction pipeline above so the two can be compared.
pub mod reference {
    use super::*;

    pub fn nested_loop_norm(
        values: ArrayViewD<'_, Complex64>,
        coords: &[Vec<f64>],
        spec: &MixedNormSpec,
    ) -> Result<f64> {
        let shape = values.shape().to_vec();
        let order = spec.axis_order();
        let mut idx = vec![0usize; shape.len()];
        level(spec.rank() as isize - 1, &mut idx, &values, coords, spec, &order, &shape)
    }

    fn level(
        lvl: isize,
        idx: &mut Vec<usize>,
        values: &ArrayViewD<'_, Complex64>,
        coords: &[Vec<f64>],
        spec: &MixedNormSpec,
        order: &[usize],
        shape: &[usize],
    ) -> Result<f64> {
        if lvl < 0 {
            let x: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| coords[k][i]).collect();
            return Ok(values[IxDyn(idx)].norm() * spec.weight.eval(&x)?);
        }
        let k = lvl as usize;
        let axis = order[k];
        let p = spec.exponents[k];
        let mut terms = Vec::with_capacity(shape[axis]);
        for i in 0..shape[axis] {
            idx[axis] = i;
            terms.push(level(lvl - 1, idx, values, coords, spec, order, shape)?);
        }
        Ok(if p.is_infinite() {
            terms.into_iter().fold(0.0, f64::max)
        } else {
            let s: f64 = terms.iter().map(|t| t.powf(p.0)).sum();
            (s * spec.cells[axis]).powf(1.0 / p.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr2, ArrayD};

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn idx_coords(shape: &[usize]) -> Vec<Vec<f64>> {
        index_coords(shape)
    }

    #[test]
    fn worked_two_by_two() {
        let a = arr2(&[[c(1.0), c(2.0)], [c(3.0), c(4.0)]]).into_dyn();
        let co = idx_coords(&[2, 2]);
        let p = vec![Exponent(1.0), Exponent::INF];
        let id = MixedNormSpec::plain(p.clone());
        assert_eq!(mixed_quasi_norm(a.view(), &co, &id).unwrap(), 6.0);
        let swap = MixedNormSpec::new(p, vec![1, 0], Weight::one(), 1.0);
        assert_eq!(mixed_quasi_norm(a.view(), &co, &swap).unwrap(), 7.0);
    }

    #[test]
    fn frobenius_case() {
        let a = arr2(&[[c(3.0), c(4.0)], [c(0.0), c(0.0)]]).into_dyn();
        let spec = MixedNormSpec::plain(vec![Exponent(2.0); 2]);
        let v = mixed_quasi_norm(a.view(), &idx_coords(&[2, 2]), &spec).unwrap();
        assert!((v - 5.0).abs() < 1e-15);
    }

    #[test]
    fn spike_picks_up_cells_and_weight() {
        let mut a = ArrayD::from_elem(IxDyn(&[3, 4, 2]), c(0.0));
        a[[1, 2, 1]] = Complex64::new(0.0, -2.5);
        let co = idx_coords(&[3, 4, 2]);
        let w = Weight::poly(2.0);
        let p = vec![Exponent(0.5), Exponent::INF, Exponent(3.0)];
        let spec = MixedNormSpec::new(p, vec![2, 0, 1], w.clone(), 0.3);
        let got = mixed_quasi_norm(a.view(), &co, &spec).unwrap();
        let expect = 2.5 * w.eval(&[1.0, 2.0, 1.0]).unwrap() * 0.3f64.powf(2.0 + 1.0 / 3.0);
        assert!((got - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn rank_and_exponent_errors() {
        let a = ArrayD::from_elem(IxDyn(&[2, 2]), c(1.0));
        let spec = MixedNormSpec::plain(vec![Exponent(1.0)]);
        assert!(matches!(
            mixed_quasi_norm(a.view(), &idx_coords(&[2, 2]), &spec),
            Err(Error::RankMismatch { .. })
        ));
        let bad = MixedNormSpec::plain(vec![Exponent(0.0), Exponent(1.0)]);
        assert!(matches!(
            mixed_quasi_norm(a.view(), &idx_coords(&[2, 2]), &bad),
            Err(Error::InvalidExponent(_))
        ));
        let mut nan = a.clone();
        nan[[0, 0]] = c(f64::NAN);
        let ok = MixedNormSpec::plain(vec![Exponent(1.0); 2]);
        assert!(matches!(mixed_quasi_norm(nan.view(), &idx_coords(&[2, 2]), &ok), Err(Error::NonFiniteInput)));
    }

    #[test]
    fn flavors() {
        let one = Exponent(2.0);
        let m = modulation_flavor_spec(&[one], &[one], 1, Flavor::M, Weight::one(), (1.0, 1.0)).unwrap();
        assert_eq!(m.permutation, vec![0, 1]);
        let w = modulation_flavor_spec(&[Exponent(1.0)], &[Exponent::INF], 1, Flavor::W, Weight::one(), (1.0, 1.0))
            .unwrap();
        assert_eq!(w.exponents, vec![Exponent::INF, Exponent(1.0)]);
        assert_eq!(w.axis_order(), vec![1, 0]);

        // A single nonzero row (x = 1): M sums over x first, W takes sup over ξ first.
        let mut a = ArrayD::from_elem(IxDyn(&[4, 4]), c(0.0));
        for k in 0..4 {
            a[[1, k]] = c(k as f64 + 1.0);
        }
        let co = idx_coords(&[4, 4]);
        let p = [Exponent(1.0)];
        let q = [Exponent(2.0)];
        let vm = mixed_quasi_norm(
            a.view(),
            &co,
            &modulation_flavor_spec(&p, &q, 1, Flavor::M, Weight::one(), (1.0, 1.0)).unwrap(),
        )
        .unwrap();
        let vw = mixed_quasi_norm(
            a.view(),
            &co,
            &modulation_flavor_spec(&p, &q, 1, Flavor::W, Weight::one(), (1.0, 1.0)).unwrap(),
        )
        .unwrap();
        // M: sum over x gives (1,2,3,4), then ℓ² = √30. W: ℓ² over ξ gives √30 at x = 1, then ℓ¹ = √30.
        assert!((vm - 30f64.sqrt()).abs() < 1e-14);
        assert!((vw - 30f64.sqrt()).abs() < 1e-14);
        // A single column separates them.
        let mut b = ArrayD::from_elem(IxDyn(&[4, 4]), c(0.0));
        for x in 0..4 {
            b[[x, 2]] = c(x as f64 + 1.0);
        }
        let vm = mixed_quasi_norm(
            b.view(),
            &co,
            &modulation_flavor_spec(&p, &q, 1, Flavor::M, Weight::one(), (1.0, 1.0)).unwrap(),
        )
        .unwrap();
        let vw = mixed_quasi_norm(
            b.view(),
            &co,
            &modulation_flavor_spec(&p, &q, 1, Flavor::W, Weight::one(), (1.0, 1.0)).unwrap(),
        )
        .unwrap();
        assert!((vm - 10.0).abs() < 1e-14);
        assert!((vw - 10.0).abs() < 1e-14);
        let q1 = [Exponent(1.0)];
        let p2 = [Exponent(2.0)];
        let vm = mixed_quasi_norm(
            b.view(),
            &co,
            &modulation_flavor_spec(&p2, &q1, 1, Flavor::M, Weight::one(), (1.0, 1.0)).unwrap(),
        )
        .unwrap();
        let vw = mixed_quasi_norm(
            b.view(),
            &co,
            &modulation_flavor_spec(&p2, &q1, 1, Flavor::W, Weight::one(), (1.0, 1.0)).unwrap(),
        )
        .unwrap();
        assert!((vm - 30f64.sqrt()).abs() < 1e-14);
        assert!((vw - 30f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn convolution_examples() {
        let f = ndarray::arr1(&[c(1.0), c(0.0), c(0.0), c(0.0)]).into_dyn();
        let g = ndarray::arr1(&[c(0.0), c(1.0), c(0.0), c(0.0)]).into_dyn();
        let h = discrete_convolution(f.view(), g.view()).unwrap();
        assert_eq!(h, g);
        let r = ndarray::arr1(&[c(0.5), c(-1.0), Complex64::new(0.0, 2.0), c(3.0)]).into_dyn();
        assert_eq!(discrete_convolution(r.view(), f.view()).unwrap(), r);
        let short = ndarray::arr1(&[c(1.0), c(0.0)]).into_dyn();
        assert!(matches!(discrete_convolution(f.view(), short.view()), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn young_equality_cases() {
        let f1 = ndarray::arr1(&[c(0.3), c(1.0), c(2.0), c(0.0), c(0.7), c(0.1), c(0.0), c(0.4)]).into_dyn();
        let mut delta = ArrayD::from_elem(IxDyn(&[8]), c(0.0));
        delta[[0]] = c(1.0);
        let rep = young_check(f1.view(), delta.view(), &[Exponent(2.0)], &Weight::one(), &Weight::one()).unwrap();
        assert!((rep.lhs - rep.rhs).abs() < 1e-15);
        let f2 = ndarray::arr1(&[c(0.2), c(0.0), c(1.5), c(0.1), c(0.0), c(0.0), c(0.9), c(0.3)]).into_dyn();
        let rep = young_check(f1.view(), f2.view(), &[Exponent(1.0)], &Weight::one(), &Weight::one()).unwrap();
        assert!((rep.lhs - rep.rhs).abs() < 1e-13 * rep.rhs);
        assert!(rep.precondition_ok);
    }

    #[test]
    fn young_bracket_needs_peetre_constant() {
        let w = Weight::poly(2.0);
        let f = ArrayD::from_elem(IxDyn(&[8]), c(1.0));
        let bare = young_check(f.view(), f.view(), &[Exponent(1.0)], &w, &w).unwrap();
        assert!(!bare.precondition_ok);
        let peetre = young_check(f.view(), f.view(), &[Exponent(1.0)], &w, &w.submultiplicative_partner()).unwrap();
        assert!(peetre.precondition_ok);
    }

    #[test]
    fn exp_convolution_examples() {
        let mut delta = ArrayD::from_elem(IxDyn(&[5]), c(0.0));
        delta[[2]] = c(1.0);
        let rep = exp_convolution_check(delta.view(), 1.0, &[Exponent(1.0)], &Weight::one(), 1.0).unwrap();
        assert!((rep.lhs - rep.rhs).abs() < 1e-13 * rep.rhs);
        let w = Weight::sub_exp(1.0, 1.0);
        let good = exp_convolution_check(delta.view(), 1.0, &[Exponent(1.0)], &w, 2.0).unwrap();
        assert!(good.admissible && good.lhs <= good.rhs);
        let bad = exp_convolution_check(delta.view(), 1.0, &[Exponent(1.0)], &w, 0.5).unwrap();
        assert!(!bad.admissible);
    }

    #[test]
    fn reference_matches_on_fixed_case() {
        let a = ArrayD::from_shape_fn(IxDyn(&[2, 3, 2]), |i| {
            Complex64::new((i[0] + 2 * i[1]) as f64 - 1.5, i[2] as f64 * 0.7)
        });
        let co = vec![vec![0.1, 0.9], vec![-1.0, 0.0, 1.0], vec![2.0, 3.0]];
        let spec = MixedNormSpec::new(
            vec![Exponent(0.7), Exponent(2.5), Exponent::INF],
            vec![1, 2, 0],
            Weight::poly(1.0),
            0.4,
        );
        let a1 = mixed_quasi_norm(a.view(), &co, &spec).unwrap();
        let a2 = reference::nested_loop_norm(a.view(), &co, &spec).unwrap();
        assert!((a1 - a2).abs() < 1e-12 * a2);
    }
}
