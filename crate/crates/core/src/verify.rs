//! Seeded verification suites. Each criterion measures one property, compares
//! it against a tolerance from the manifest and records the measurements.
//!
//! | suite | criteria |
//! |---|---|
//! | `young` | 1, 2, 9 |
//! | `moyal` | 3, 4 |
//! | `trace` | 5, 6 |
//! | `reduce` | 7 |
//! | `transfer` | 8 |
//! | `schatten` | 10, 11 |
//!
//! Every reduction runs in a fixed order, so reports depend only on the
//! manifest. Deterministic mode additionally leaves out wall times.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{gabor_coefficients, gabor_synthesis, stft, GaborSystem, Window};
use crate::lattice::{unravel, GridSpec, SampledField};
use crate::mixed_norm::{exp_convolution_check, mixed_quasi_norm, reference::nested_loop_norm, young_check, Exponent, MixedNormSpec};
use crate::psdo::{
    calculus_transfer, extend_symbol, gaussian_symbol, op_from_amplitude, op_from_symbol, reduce_amplitude,
    separable_gaussian_amplitude, QuantizationMatrix,
};
use crate::spectral::{matrix_singular_values, schatten_bound_experiment, schatten_quasi_norm, truncation_error, SchattenConfig};
use crate::trace::{random_gabor_field, stft_trace_identity_residual, trace_bound_experiment, DimSplit, TraceExperimentConfig};
use crate::weights::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Young,
    Moyal,
    Trace,
    Reduce,
    Transfer,
    Schatten,
    All,
}

impl Suite {
    pub const SINGLE: [Suite; 6] = [Suite::Young, Suite::Moyal, Suite::Trace, Suite::Reduce, Suite::Transfer, Suite::Schatten];

    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::Young => vec![1, 2, 9],
            Suite::Moyal => vec![3, 4],
            Suite::Trace => vec![5, 6],
            Suite::Reduce => vec![7],
            Suite::Transfer => vec![8],
            Suite::Schatten => vec![10, 11],
            Suite::All => Suite::SINGLE.iter().flat_map(|s| s.criteria()).collect(),
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "young" => Suite::Young,
            "moyal" => Suite::Moyal,
            "trace" => Suite::Trace,
            "reduce" => Suite::Reduce,
            "transfer" => Suite::Transfer,
            "schatten" => Suite::Schatten,
            "all" => Suite::All,
            other => return Err(Error::Config(format!("unknown suite `{other}`"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        write!(f, "{}", s.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub young: f64,
    pub moyal: f64,
    pub frame_round_trip: f64,
    pub trace_identity: f64,
    /// Required factor between the identity residuals at the two resolutions.
    pub trace_identity_decay: f64,
    pub trace_growth: f64,
    pub reduce: f64,
    pub extend: f64,
    pub reduce_exact: f64,
    pub transfer: f64,
    pub multiplier_round_trip: f64,
    pub oracle: f64,
    pub spectral: f64,
    pub schatten_growth: f64,
    pub schatten_frobenius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            young: 1e-12,
            moyal: 1e-6,
            frame_round_trip: 1e-8,
            trace_identity: 1e-5,
            trace_identity_decay: 2.0,
            trace_growth: 1.25,
            reduce: 1e-6,
            extend: 1e-8,
            reduce_exact: 1e-12,
            transfer: 1e-6,
            multiplier_round_trip: 1e-12,
            oracle: 1e-12,
            spectral: 1e-10,
            schatten_growth: 1.3,
            schatten_frobenius: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YoungSettings {
    pub trials: usize,
    pub min_points: usize,
    pub max_points: usize,
    pub exponents: Vec<Exponent>,
    /// Half-width `M` of the `(2M+1)`-point field in the exponential-kernel check.
    pub kernel_half_width: usize,
    pub kernel_spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSettings {
    pub n: usize,
    pub fields: usize,
    #[serde(default)]
    pub strides: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceIdentitySettings {
    pub resolutions: (usize, usize),
    pub fields: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    pub draws: usize,
    pub triangle_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSettings {
    pub matrices: usize,
    pub max_side: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyManifest {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub young: YoungSettings,
    pub moyal: FieldSettings,
    pub frame: FieldSettings,
    pub trace_identity: TraceIdentitySettings,
    pub trace: TraceExperimentConfig,
    pub reduce: FieldSettings,
    pub transfer: FieldSettings,
    pub oracle: OracleSettings,
    pub spectral: SpectralSettings,
    pub schatten: SchattenConfig,
}

impl Default for VerifyManifest {
    fn default() -> Self {
        VerifyManifest {
            seed: 2024,
            tolerances: Tolerances::default(),
            young: YoungSettings {
                trials: 200,
                min_points: 8,
                max_points: 16,
                exponents: vec![Exponent(0.5), Exponent(1.0), Exponent(2.0), Exponent::INF],
                kernel_half_width: 4,
                kernel_spacing: 0.5,
            },
            moyal: FieldSettings { n: 64, fields: 20, strides: None },
            frame: FieldSettings { n: 48, fields: 20, strides: Some((4, 4)) },
            trace_identity: TraceIdentitySettings { resolutions: (16, 32), fields: 10 },
            trace: TraceExperimentConfig::sobolev(DimSplit::at_origin(1, 1, 0).expect("valid split"), 1.0, 0.0),
            reduce: FieldSettings { n: 32, fields: 10, strides: None },
            transfer: FieldSettings { n: 32, fields: 10, strides: None },
            oracle: OracleSettings { draws: 100, triangle_trials: 200 },
            spectral: SpectralSettings { matrices: 50, max_side: 16 },
            schatten: SchattenConfig::trivial(Exponent(2.0), Exponent(1.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: Suite,
    pub deterministic: bool,
    pub manifest: VerifyManifest,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl Report {
    /// One line per criterion.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("C{:<3} {status}  {}\n", c.id, c.name));
        }
        out
    }
}

struct Outcome {
    name: &'static str,
    passed: bool,
    measured: BTreeMap<String, f64>,
}

impl Outcome {
    fn new(name: &'static str) -> Self {
        Outcome { name, passed: true, measured: BTreeMap::new() }
    }

    fn record(&mut self, key: impl Into<String>, value: f64) {
        self.measured.insert(key.into(), value);
    }

    /// Records `value` and requires `value <= limit`.
    fn at_most(&mut self, key: &str, value: f64, limit: f64) {
        self.record(key, value);
        self.passed &= value <= limit;
    }

    fn require(&mut self, key: &str, ok: bool) {
        self.record(key, if ok { 1.0 } else { 0.0 });
        self.passed &= ok;
    }
}

fn rng_for(seed: u64, criterion: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (u64::from(criterion) << 56))
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn sup_relative(a: &SampledField, b: &SampledField) -> f64 {
    let diff = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let base = b.max_abs();
    if base > 0.0 {
        diff / base
    } else {
        diff
    }
}

fn young(m: &VerifyManifest) -> Result<Outcome> {
    let s = &m.young;
    let mut o = Outcome::new("Young inequality for weighted convolution");
    let mut rng = rng_for(m.seed, 1);
    let pairs = [
        ("unweighted", Weight::one(), Weight::one()),
        ("bracket_sq", Weight::poly(2.0), Weight::poly(2.0).submultiplicative_partner()),
        ("exponential", Weight::sub_exp(1.0, 1.0), Weight::sub_exp(1.0, 1.0)),
    ];
    let mut worst = f64::NEG_INFINITY;
    let mut precondition = true;
    for p in &s.exponents {
        for t in 0..s.trials {
            let (_, omega, v) = &pairs[t % pairs.len()];
            let n = rng.random_range(s.min_points..=s.max_points);
            let f1 = ArrayD::from_shape_fn(IxDyn(&[n]), |_| random_complex(&mut rng));
            let f2 = ArrayD::from_shape_fn(IxDyn(&[n]), |_| random_complex(&mut rng));
            let r = young_check(f1.view(), f2.view(), &[*p], omega, v)?;
            worst = worst.max(r.lhs - r.rhs);
            precondition &= r.precondition_ok;
        }
    }
    o.at_most("max_lhs_minus_rhs", worst, m.tolerances.young);
    o.require("preconditions_hold", precondition);
    Ok(o)
}

fn exp_convolution(m: &VerifyManifest) -> Result<Outcome> {
    let s = &m.young;
    let mut o = Outcome::new("exponential-kernel convolution constant");
    let mut rng = rng_for(m.seed, 2);
    let n = 2 * s.kernel_half_width + 1;
    let f = ArrayD::from_shape_fn(IxDyn(&[n]), |_| random_complex(&mut rng));
    let omega = Weight::sub_exp(1.0, 1.0);
    for p in [Exponent(1.0), Exponent(2.0)] {
        let good = exp_convolution_check(f.view(), s.kernel_spacing, &[p], &omega, 2.0)?;
        let bad = exp_convolution_check(f.view(), s.kernel_spacing, &[p], &omega, 0.5)?;
        let tag = p.value();
        o.record(format!("constant_r2_p{tag}"), good.constant);
        o.require(&format!("admissible_r2_p{tag}"), good.admissible);
        o.require(&format!("rejected_r0.5_p{tag}"), !bad.admissible);
        o.require(&format!("inequality_r2_p{tag}"), good.lhs <= good.rhs * (1.0 + 1e-12));
    }
    Ok(o)
}

fn random_spec(rng: &mut ChaCha8Rng, rank: usize) -> MixedNormSpec {
    let exps = (0..rank)
        .map(|_| match rng.random_range(0..5) {
            0 => Exponent::INF,
            1 => Exponent(1.0),
            2 => Exponent(2.0),
            3 => Exponent(0.5),
            _ => Exponent(rng.random_range(0.3..5.0)),
        })
        .collect();
    let mut perm: Vec<usize> = (0..rank).collect();
    for i in (1..rank).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let weight = match rng.random_range(0..3) {
        0 => Weight::one(),
        1 => Weight::poly(rng.random_range(-2.0..2.0)),
        _ => Weight::sub_exp(rng.random_range(0.1..1.0), 0.5),
    };
    let cells = (0..rank).map(|_| rng.random_range(0.25..2.0)).collect();
    MixedNormSpec::new(exps, perm, weight, 1.0).with_cells(cells)
}

fn random_array(rng: &mut ChaCha8Rng, shape: &[usize]) -> ArrayD<Complex64> {
    ArrayD::from_shape_fn(IxDyn(shape), |_| random_complex(rng))
}

fn oracle(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("mixed-norm oracle and r-triangle inequality");
    let mut rng = rng_for(m.seed, 9);
    let mut worst: f64 = 0.0;
    for _ in 0..m.oracle.draws {
        let rank = rng.random_range(1..=3);
        let shape: Vec<usize> = (0..rank).map(|_| rng.random_range(1..=3)).collect();
        let coords: Vec<Vec<f64>> = shape.iter().map(|&n| (0..n).map(|i| i as f64 - 1.0).collect()).collect();
        let a = random_array(&mut rng, &shape);
        let spec = random_spec(&mut rng, rank);
        let fast = mixed_quasi_norm(a.view(), &coords, &spec)?;
        let slow = nested_loop_norm(a.view(), &coords, &spec)?;
        worst = worst.max((fast - slow).abs() / slow.max(f64::MIN_POSITIVE));
    }
    o.at_most("max_relative_oracle_gap", worst, m.tolerances.oracle);
    let mut triangle = 0.0f64;
    for _ in 0..m.oracle.triangle_trials {
        let rank = rng.random_range(1..=3);
        let shape: Vec<usize> = (0..rank).map(|_| rng.random_range(1..=3)).collect();
        let coords: Vec<Vec<f64>> = shape.iter().map(|&n| (0..n).map(|i| i as f64 - 1.0).collect()).collect();
        let a = random_array(&mut rng, &shape);
        let b = random_array(&mut rng, &shape);
        let spec = random_spec(&mut rng, rank);
        let r = spec.exponents.iter().fold(1.0f64, |acc, e| acc.min(e.value()));
        let sum = &a + &b;
        let lhs = mixed_quasi_norm(sum.view(), &coords, &spec)?.powf(r);
        let rhs = mixed_quasi_norm(a.view(), &coords, &spec)?.powf(r) + mixed_quasi_norm(b.view(), &coords, &spec)?.powf(r);
        triangle = triangle.max((lhs - rhs) / rhs);
    }
    o.at_most("max_relative_triangle_excess", triangle, 1e-12);
    Ok(o)
}

fn random_noise(grid: GridSpec, rng: &mut ChaCha8Rng) -> Result<SampledField> {
    SampledField::new(grid, (0..grid.len()).map(|_| random_complex(rng)).collect())
}

fn moyal(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("Moyal identity");
    let g = GridSpec::self_dual(1, m.moyal.n)?;
    let phi = Window::gaussian(&g);
    let mut worst: f64 = 0.0;
    for k in 0..m.moyal.fields {
        let f = random_gabor_field(&g, m.seed, k as u64);
        let v = stft(&f, &phi)?;
        let lhs: f64 = v.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.step() * g.freq_step();
        let rhs = f.l2_norm().powi(2) * phi.grid_norm().powi(2);
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    o.at_most("max_relative_residual", worst, m.tolerances.moyal);
    Ok(o)
}

fn frame(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("Gabor frame round trip with the canonical dual");
    let (a, b) = m.frame.strides.unwrap_or((4, 4));
    let g = GridSpec::self_dual(1, m.frame.n)?;
    let system = GaborSystem::new(Window::gaussian(&g), a, b)?.with_canonical_dual()?;
    let dual = system.dual().expect("attached");
    let mut rng = rng_for(m.seed, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..m.frame.fields {
        let f = random_noise(g, &mut rng)?;
        let back = gabor_synthesis(&gabor_coefficients(&f, &system)?, dual)?;
        worst = worst.max(sup_relative(&back, &f));
    }
    o.at_most("max_relative_reconstruction_error", worst, m.tolerances.frame_round_trip);
    Ok(o)
}

fn trace_identity(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("STFT trace identity");
    let split = DimSplit::at_origin(1, 1, 0)?;
    let (lo, hi) = m.trace_identity.resolutions;
    let mut residuals = Vec::new();
    for n in [lo, hi] {
        let g = GridSpec::self_dual(2, n)?;
        let g1 = g.with_dim(1)?;
        let phi = Window::gaussian(&g1);
        let mut worst: f64 = 0.0;
        for k in 0..m.trace_identity.fields {
            let f = random_gabor_field(&g, m.seed, k as u64);
            worst = worst.max(stft_trace_identity_residual(&f, &split, &phi, &phi)?);
        }
        o.record(format!("residual_n{n}"), worst);
        residuals.push(worst);
        // Off-origin trace point, where the sign of the phase e^{iz·η} matters.
        let offset = DimSplit::new(1, 1, 0, vec![2.0 * g.step()])?;
        let f = random_gabor_field(&g, m.seed, 0);
        let shifted = stft_trace_identity_residual(&f, &offset, &phi, &phi)?;
        o.at_most(&format!("residual_offset_z_n{n}"), shifted, if n == hi { m.tolerances.trace_identity } else { f64::INFINITY });
    }
    o.at_most("residual_fine", residuals[1], m.tolerances.trace_identity);
    let decay = if residuals[1] > 0.0 { residuals[0] / residuals[1] } else { f64::INFINITY };
    o.record("decay_factor", decay);
    o.passed &= decay >= m.tolerances.trace_identity_decay;
    Ok(o)
}

fn trace_bound(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("trace boundedness, Sobolev case");
    let r = trace_bound_experiment(&m.trace)?;
    for res in &r.results {
        o.record(format!("sup_ratio_n{}", res.n), res.sup_ratio);
        o.record(format!("extension_ratio_n{}", res.n), res.extension_ratio);
    }
    o.require("sup_ratios_finite", r.results.iter().all(|x| x.sup_ratio.is_finite()));
    o.require("right_inverse_exact", r.results.iter().all(|x| x.right_inverse_exact));
    o.at_most("growth_factor", r.growth_factor, m.tolerances.trace_growth);
    Ok(o)
}

fn reduce(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("amplitude reduction and symbol extension");
    let n = m.reduce.n;
    let g3 = GridSpec::self_dual(3, n)?;
    let g2 = g3.with_dim(2)?;
    let g1 = g3.with_dim(1)?;
    let mut op_gap: f64 = 0.0;
    let mut ext_gap: f64 = 0.0;
    let mut exact_gap: f64 = 0.0;
    let window = Window::unit_gaussian(&g1);
    for k in 0..m.reduce.fields as u64 {
        let a = separable_gaussian_amplitude(&g3, m.seed, k);
        let op = op_from_amplitude(&a)?;
        let op0 = op_from_symbol(&reduce_amplitude(&a)?, QuantizationMatrix::KOHN_NIRENBERG)?;
        op_gap = op_gap.max(op.relative_distance(&op0)?);

        let a0 = gaussian_symbol(&g2, m.seed, k);
        let back = reduce_amplitude(&extend_symbol(&a0, &window)?)?;
        ext_gap = ext_gap.max(sup_relative(&back, &a0));

        let flat: Vec<Complex64> = (0..g3.len())
            .map(|i| {
                let idx = unravel(i, n, 3);
                a0.get(&[idx[0], idx[2]])
            })
            .collect();
        let reduced = reduce_amplitude(&SampledField::new(g3, flat)?)?;
        exact_gap = exact_gap.max(sup_relative(&reduced, &a0));
    }
    o.at_most("operator_relative_frobenius", op_gap, m.tolerances.reduce);
    o.at_most("extension_round_trip", ext_gap, m.tolerances.extend);
    o.at_most("y_independent_error", exact_gap, m.tolerances.reduce_exact);
    Ok(o)
}

fn transfer(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("Weyl to Kohn-Nirenberg calculus transfer");
    let g2 = GridSpec::self_dual(2, m.transfer.n)?;
    let mut matrix_gap: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    for k in 0..m.transfer.fields as u64 {
        let a = gaussian_symbol(&g2, m.seed, k);
        let kn = calculus_transfer(&a, QuantizationMatrix::WEYL, QuantizationMatrix::KOHN_NIRENBERG)?;
        let weyl_op = op_from_symbol(&a, QuantizationMatrix::WEYL)?;
        let kn_op = op_from_symbol(&kn, QuantizationMatrix::KOHN_NIRENBERG)?;
        matrix_gap = matrix_gap.max(weyl_op.relative_distance(&kn_op)?);
        let back = calculus_transfer(&kn, QuantizationMatrix::KOHN_NIRENBERG, QuantizationMatrix::WEYL)?;
        round_trip = round_trip.max(sup_relative(&back, &a));
    }
    o.at_most("operator_relative_frobenius", matrix_gap, m.tolerances.transfer);
    o.at_most("multiplier_round_trip", round_trip, m.tolerances.multiplier_round_trip);
    Ok(o)
}

fn spectral(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("singular values and Schatten quasi-norms");
    let mut rng = rng_for(m.seed, 10);
    let ps = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, f64::INFINITY].map(Exponent);
    let (mut ey, mut frob_gap) = (0.0f64, 0.0f64);
    let mut monotone = true;
    for _ in 0..m.spectral.matrices {
        let r = rng.random_range(2..=m.spectral.max_side);
        let c = rng.random_range(2..=m.spectral.max_side);
        let t = DMatrix::from_fn(r, c, |_, _| random_complex(&mut rng));
        let s = matrix_singular_values(&t)?;
        ey = ey.max((truncation_error(&t, 2)? - s.values[1]).abs() / s.values[0]);
        let frob = t.norm();
        frob_gap = frob_gap.max((schatten_quasi_norm(&s, Exponent(2.0)) - frob).abs() / frob);
        let norms: Vec<f64> = ps.iter().map(|p| schatten_quasi_norm(&s, *p)).collect();
        monotone &= norms.windows(2).all(|w| w[0] >= w[1]);
    }
    o.at_most("eckart_young_gap", ey, m.tolerances.spectral);
    o.at_most("schatten2_vs_frobenius", frob_gap, m.tolerances.spectral);
    o.require("monotone_in_p", monotone);
    Ok(o)
}

fn schatten(m: &VerifyManifest) -> Result<Outcome> {
    let mut o = Outcome::new("Schatten bound for amplitude operators");
    let r = schatten_bound_experiment(&m.schatten)?;
    for res in &r.results {
        o.record(format!("max_ratio_n{}", res.n), res.max_ratio);
        o.record(format!("frame_lower_n{}", res.n), res.frame_bounds.lower);
        o.record(format!("frame_upper_n{}", res.n), res.frame_bounds.upper);
    }
    o.record("weight_condition_ratio", r.weight_condition_ratio);
    o.require("non_degenerate", !r.degenerate);
    o.at_most("growth_factor", r.growth_factor, m.tolerances.schatten_growth);
    o.at_most("frobenius_cross_check", r.max_frobenius_mismatch, m.tolerances.schatten_frobenius);
    Ok(o)
}

/// Runs a single criterion.
pub fn run_criterion(id: u8, manifest: &VerifyManifest, deterministic: bool) -> Result<CriterionResult> {
    let start = Instant::now();
    let o = match id {
        1 => young(manifest)?,
        2 => exp_convolution(manifest)?,
        3 => moyal(manifest)?,
        4 => frame(manifest)?,
        5 => trace_identity(manifest)?,
        6 => trace_bound(manifest)?,
        7 => reduce(manifest)?,
        8 => transfer(manifest)?,
        9 => oracle(manifest)?,
        10 => spectral(manifest)?,
        11 => schatten(manifest)?,
        other => return Err(Error::Config(format!("no criterion {other}"))),
    };
    // NaN measurements never pass.
    let passed = o.passed && o.measured.values().all(|v| !v.is_nan());
    Ok(CriterionResult {
        id,
        name: o.name.to_string(),
        passed,
        measured: o.measured,
        wall_seconds: (!deterministic).then(|| start.elapsed().as_secs_f64()),
    })
}

pub fn run_suite(suite: Suite, manifest: &VerifyManifest, deterministic: bool) -> Result<Report> {
    let criteria = suite
        .criteria()
        .into_iter()
        .map(|id| run_criterion(id, manifest, deterministic))
        .collect::<Result<Vec<_>>>()?;
    let passed = criteria.iter().all(|c| c.passed);
    Ok(Report { suite, deterministic, manifest: manifest.clone(), criteria, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for s in Suite::SINGLE.iter().chain([Suite::All].iter()) {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
        assert_eq!(Suite::All.criteria(), vec![1, 2, 9, 3, 4, 5, 6, 7, 8, 10, 11]);
    }

    #[test]
    fn manifest_defaults_round_trip() {
        let m = VerifyManifest::default();
        let text = serde_json::to_string(&m).unwrap();
        let back: VerifyManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let partial: VerifyManifest = serde_json::from_str(r#"{"seed": 7, "tolerances": {"reduce": 1e-14}}"#).unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.tolerances.reduce, 1e-14);
        assert_eq!(partial.tolerances.moyal, 1e-6);
        assert!(serde_json::from_str::<VerifyManifest>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn fast_criteria_pass() {
        let m = VerifyManifest::default();
        for id in [1, 2, 9, 10] {
            let r = run_criterion(id, &m, true).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.wall_seconds.is_none());
        }
    }
}
