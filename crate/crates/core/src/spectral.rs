//! Singular numbers, Schatten quasi-norms and the Schatten bound experiment
//! for amplitude operators between weighted `M²` spaces.
//!
//! Between Hilbert spaces the nuclear classes of order `p ≤ 1` coincide with
//! the Schatten classes, so the Schatten numbers computed here also serve as
//! the nuclear surrogate on the pair `(M²_{(ω₁)}, M²_{(ω₂)})`. Nuclear norms
//! between non-Hilbert spaces are not computed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{frame_bounds, gabor_coefficients_with, gabor_synthesis, FrameBounds, GaborSystem, PhaseSpaceArray, Window};
use crate::lattice::{GridSpec, SampledField};
use crate::mixed_norm::{Exponent, Flavor};
use crate::operator::{OperatorMatrix, Provenance};
use crate::psdo::{amplitude_mod_norm, extend_symbol, gaussian_symbol, op_from_amplitude, weight_condition_ratio};
use crate::weights::Weight;

/// Largest matrix side accepted by the dense decompositions.
pub const MAX_DENSE_SIDE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    /// Nonincreasing, nonnegative.
    pub values: Vec<f64>,
    pub source: String,
}

fn svd_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.nrows().max(m.ncols()) > MAX_DENSE_SIDE {
        return Err(Error::MemoryGuard { entries: m.nrows() * m.ncols(), cap: MAX_DENSE_SIDE * MAX_DENSE_SIDE });
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let mut v: Vec<f64> = svd.singular_values.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

pub fn singular_values(t: &OperatorMatrix) -> Result<SingularSpectrum> {
    Ok(SingularSpectrum { values: svd_values(&t.entries)?, source: format!("{:?}", t.provenance) })
}

/// Singular values of a bare matrix.
pub fn matrix_singular_values(m: &DMatrix<Complex64>) -> Result<SingularSpectrum> {
    Ok(SingularSpectrum { values: svd_values(m)?, source: "matrix".into() })
}

/// `(Σ σ_j^p)^{1/p}`, or `σ₁` for `p = ∞`.
pub fn schatten_quasi_norm(s: &SingularSpectrum, p: Exponent) -> f64 {
    let top = s.values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let sum: f64 = s.values.iter().map(|v| (v / top).powf(p.value())).sum();
    top * sum.powf(1.0 / p.value())
}

/// `‖T - T_{j-1}‖₂` for the truncated SVD `T_{j-1}` of rank `j - 1`.
pub fn truncation_error(m: &DMatrix<Complex64>, j: usize) -> Result<f64> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut approx = DMatrix::<Complex64>::zeros(m.nrows(), m.ncols());
    for &k in order.iter().take(j.saturating_sub(1)) {
        let s = Complex64::new(svd.singular_values[k], 0.0);
        approx += u.column(k) * vt.row(k) * s;
    }
    Ok(svd_values(&(m - approx))?.first().copied().unwrap_or(0.0))
}

fn coefficient_weights(c: &PhaseSpaceArray, w: &Weight) -> Result<Vec<f64>> {
    let shape = c.shape();
    let coords = c.coords();
    (0..c.values().len())
        .map(|flat| {
            let mut rem = flat;
            let mut pt = vec![0.0; shape.len()];
            for k in (0..shape.len()).rev() {
                pt[k] = coords[k][rem % shape[k]];
                rem /= shape[k];
            }
            w.eval(&pt)
        })
        .collect()
}

/// `T̃ = D_{ω₂} C_φ T D_γ D_{ω₁}⁻¹`, with `C_φ` Gabor analysis, `D_γ`
/// synthesis with the canonical dual and `D_ω` diagonal weights on the
/// lattice coefficients.
pub fn weighted_m2_conjugate(t: &OperatorMatrix, omega1: &Weight, omega2: &Weight, system: &GaborSystem) -> Result<OperatorMatrix> {
    let g = *system.grid();
    if t.domain != g || t.codomain != g {
        return Err(Error::GridMismatch("operator and Gabor system grids differ".into()));
    }
    let dual = system
        .dual()
        .ok_or_else(|| Error::NotAFrame("Gabor system has no dual window attached".into()))?;
    let strides = system.strides();
    let len = g.len();
    let zero = SampledField::zeros(g);
    let template = gabor_coefficients_with(&zero, system.window(), strides)?;
    let m = template.values().len();
    let w1 = coefficient_weights(&template, omega1)?;
    let w2 = coefficient_weights(&template, omega2)?;

    // Columns of the analysis matrix: coefficients of the unit vectors.
    let mut analysis = DMatrix::<Complex64>::zeros(m, len);
    for col in 0..len {
        let mut e = vec![Complex64::new(0.0, 0.0); len];
        e[col] = Complex64::new(1.0, 0.0);
        let c = gabor_coefficients_with(&SampledField::new(g, e)?, system.window(), strides)?;
        analysis.set_column(col, &DVector::from_column_slice(c.values()));
    }
    let mut synthesis = DMatrix::<Complex64>::zeros(len, m);
    for col in 0..m {
        let mut e = vec![Complex64::new(0.0, 0.0); m];
        e[col] = Complex64::new(1.0, 0.0);
        let f = gabor_synthesis(&PhaseSpaceArray::new(g, strides, e)?, dual)?;
        synthesis.set_column(col, &DVector::from_column_slice(f.values()));
    }
    let mut out = analysis * &t.entries * synthesis;
    for i in 0..m {
        for j in 0..m {
            out[(i, j)] *= w2[i] / w1[j];
        }
    }
    let flat = flat_grid(m)?;
    OperatorMatrix::new(out, flat, flat, Provenance::Conjugated)
}

/// A one-axis stand-in grid with exactly `m` points.
fn flat_grid(m: usize) -> Result<GridSpec> {
    if m >= 4 && m % 2 == 0 {
        GridSpec::new(1, m, 1.0)
    } else {
        Err(Error::ShapeMismatch(format!("coefficient count {m} must be even and >= 4")))
    }
}

/// Largest `q` admitted for a given `p`: `min(p, p')`.
pub fn schatten_q_limit(p: Exponent) -> f64 {
    let pv = p.value();
    let conj = if pv <= 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        pv / (pv - 1.0)
    };
    pv.min(conj)
}

fn default_schatten_resolutions() -> Vec<usize> {
    vec![12, 16]
}

fn default_schatten_family() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchattenConfig {
    pub p: Exponent,
    pub q: Exponent,
    #[serde(default)]
    pub omega: Weight,
    #[serde(default)]
    pub omega1: Weight,
    #[serde(default)]
    pub omega2: Weight,
    #[serde(default)]
    pub theta: Weight,
    #[serde(default = "default_schatten_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default = "default_schatten_family")]
    pub family_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Replace the family by the zero amplitude.
    #[serde(default)]
    pub zero_amplitude: bool,
}

impl SchattenConfig {
    pub fn trivial(p: Exponent, q: Exponent) -> Self {
        SchattenConfig {
            p,
            q,
            omega: Weight::one(),
            omega1: Weight::one(),
            omega2: Weight::one(),
            theta: Weight::one(),
            resolutions: default_schatten_resolutions(),
            family_size: default_schatten_family(),
            seed: 0,
            zero_amplitude: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenMember {
    pub schatten: f64,
    pub amplitude_norm: f64,
    pub ratio: f64,
    /// `|𝓘₂(T̃) - ‖T̃‖_F| / ‖T̃‖_F`.
    pub frobenius_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenResolution {
    pub n: usize,
    pub frame_bounds: FrameBounds,
    pub members: Vec<SchattenMember>,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub p: Exponent,
    pub q: Exponent,
    /// `p ≤ 1`: the values double as nuclear quasi-norms on the Hilbert pair.
    pub nuclear_surrogate: bool,
    pub weight_condition_ratio: f64,
    pub degenerate: bool,
    pub results: Vec<SchattenResolution>,
    pub growth_factor: f64,
    pub max_frobenius_mismatch: f64,
}

/// Ratios `‖Op(a)‖_{𝓘_p(M²_{(ω₁)}, M²_{(ω₂)})} / ‖a‖_{𝓜^{p,∞,p,q,q,q}_{(ω)}}` for `d = 1`
/// over extensions of random Gaussian symbols.
pub fn schatten_bound_experiment(config: &SchattenConfig) -> Result<SchattenReport> {
    let limit = schatten_q_limit(config.p);
    if config.q.value() > limit {
        return Err(Error::ExponentViolation(format!(
            "q = {} exceeds min(p, p') = {limit}",
            config.q.value()
        )));
    }
    let wc = weight_condition_ratio(&config.omega, &config.omega1, &config.omega2, &config.theta, 4.0, 9)?;
    let mut results = Vec::new();
    let mut degenerate = false;
    let mut worst_frob: f64 = 0.0;
    for &n in &config.resolutions {
        let g3 = GridSpec::self_dual(3, n)?;
        let g2 = g3.with_dim(2)?;
        let g1 = g3.with_dim(1)?;
        let phi3 = Window::gaussian(&g3);
        let system = GaborSystem::new(Window::gaussian(&g1), 1, 1)?.with_canonical_dual()?;
        let bounds = frame_bounds(&system)?;
        let ext_window = Window::unit_gaussian(&g1);
        let mut members = Vec::with_capacity(config.family_size);
        for k in 0..config.family_size {
            let a = if config.zero_amplitude {
                SampledField::zeros(g3)
            } else {
                extend_symbol(&gaussian_symbol(&g2, config.seed, k as u64), &ext_window)?
            };
            let a_norm = amplitude_mod_norm(
                &a,
                &phi3,
                &[config.p, Exponent::INF, config.p],
                &[config.q; 3],
                &config.omega,
                Flavor::M,
                (1, 1),
            )?;
            let t = weighted_m2_conjugate(&op_from_amplitude(&a)?, &config.omega1, &config.omega2, &system)?;
            let spec = singular_values(&t)?;
            let schatten = schatten_quasi_norm(&spec, config.p);
            let frob = t.frobenius();
            let frobenius_mismatch = if frob > 0.0 { (schatten_quasi_norm(&spec, Exponent(2.0)) - frob).abs() / frob } else { 0.0 };
            worst_frob = worst_frob.max(frobenius_mismatch);
            let ratio = if a_norm > 0.0 {
                schatten / a_norm
            } else {
                degenerate = true;
                f64::NAN
            };
            members.push(SchattenMember { schatten, amplitude_norm: a_norm, ratio, frobenius_mismatch });
        }
        let max_ratio = members.iter().map(|m| m.ratio).filter(|r| r.is_finite()).fold(0.0, f64::max);
        results.push(SchattenResolution { n, frame_bounds: bounds, members, max_ratio });
    }
    let growth_factor = if degenerate || results.is_empty() {
        f64::NAN
    } else {
        results.last().expect("nonempty").max_ratio / results[0].max_ratio
    };
    Ok(SchattenReport {
        p: config.p,
        q: config.q,
        nuclear_surrogate: config.p.value() <= 1.0,
        weight_condition_ratio: wc,
        degenerate,
        results,
        growth_factor,
        max_frobenius_mismatch: worst_frob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_and_rank_one() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(1.0), c(-2.0)]));
        let s = matrix_singular_values(&d).unwrap();
        for (a, b) in s.values.iter().zip([3.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let u = DVector::from_vec(vec![c(1.0), Complex64::new(0.0, 2.0), c(-1.0)]);
        let v = DVector::from_vec(vec![c(0.5), c(0.5), Complex64::new(1.0, 1.0)]);
        let m = &u * v.adjoint();
        let s = matrix_singular_values(&m).unwrap();
        assert!((s.values[0] - u.norm() * v.norm()).abs() < 1e-13);
        assert!(s.values[1] < 1e-13 && s.values[2] < 1e-13);
    }

    #[test]
    fn schatten_examples() {
        let s = SingularSpectrum { values: vec![4.0, 1.0], source: String::new() };
        assert!((schatten_quasi_norm(&s, Exponent(0.5)) - 9.0).abs() < 1e-13);
        assert_eq!(schatten_quasi_norm(&s, Exponent::INF), 4.0);
        assert!((schatten_quasi_norm(&s, Exponent(2.0)) - 17f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn q_limits() {
        assert_eq!(schatten_q_limit(Exponent(2.0)), 2.0);
        assert_eq!(schatten_q_limit(Exponent(0.5)), 0.5);
        assert!((schatten_q_limit(Exponent(4.0)) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(schatten_q_limit(Exponent::INF), 1.0);
    }

    #[test]
    fn exponent_violation() {
        let cfg = SchattenConfig::trivial(Exponent(2.0), Exponent(3.0));
        assert!(matches!(schatten_bound_experiment(&cfg), Err(Error::ExponentViolation(_))));
    }
}
