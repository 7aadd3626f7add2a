//! Moderate weight expressions and the trace-condition constant.
//!
//! A [`Weight`] is a small expression tree evaluated in log space, so that
//! sub-exponential factors such as `e^{r|x|}` never overflow on the grids used
//! here. Leaves act on the whole coordinate vector they receive; `BlockLift`
//! restricts its inner weight to a set of coordinate blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::GridSpec;
use crate::mixed_norm::Exponent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    /// `⟨x⟩^s = (1 + |x|²)^{s/2}`.
    PolyBracket { s: f64 },
    /// `e^{r |x|^θ}`, `0 < θ ≤ 1`.
    SubExp { r: f64, theta: f64 },
    /// Applies `inner` to the concatenation of the blocks `x[offsets[i] .. offsets[i] + lengths[i]]`.
    BlockLift { offsets: Vec<usize>, lengths: Vec<usize>, inner: Box<Weight> },
    Product { factors: Vec<Weight> },
    Reciprocal { inner: Box<Weight> },
    Constant { c: f64 },
}

impl Default for Weight {
    fn default() -> Self {
        Weight::one()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl Weight {
    pub fn one() -> Self {
        Weight::Constant { c: 1.0 }
    }

    pub fn constant(c: f64) -> Self {
        Weight::Constant { c }
    }

    pub fn poly(s: f64) -> Self {
        Weight::PolyBracket { s }
    }

    pub fn sub_exp(r: f64, theta: f64) -> Self {
        Weight::SubExp { r, theta }
    }

    pub fn product(factors: Vec<Weight>) -> Self {
        Weight::Product { factors }
    }

    pub fn reciprocal(inner: Weight) -> Self {
        Weight::Reciprocal { inner: Box::new(inner) }
    }

    /// `inner` applied to the single block `x[offset .. offset + len]`.
    pub fn lift(offset: usize, len: usize, inner: Weight) -> Self {
        Weight::BlockLift { offsets: vec![offset], lengths: vec![len], inner: Box::new(inner) }
    }

    /// `ω_r(x, ξ) = ω(x) ⟨ξ⟩^{-r}` with `x, ξ ∈ ℝ^d`.
    pub fn omega_r(base: Weight, r: f64, d: usize) -> Self {
        Weight::product(vec![Weight::lift(0, d, base), Weight::lift(d, d, Weight::poly(-r))])
    }

    /// `ω_{r,s}(x, ξ) = ω(x) e^{-r |ξ|^{1/s}}` with `s ≥ 1`.
    pub fn omega_rs(base: Weight, r: f64, s: f64, d: usize) -> Self {
        Weight::product(vec![
            Weight::lift(0, d, base),
            Weight::reciprocal(Weight::lift(d, d, Weight::sub_exp(r, 1.0 / s))),
        ])
    }

    /// True when the tree is a product of positive constants only.
    pub fn is_constant(&self) -> bool {
        match self {
            Weight::Constant { .. } => true,
            Weight::PolyBracket { s } => *s == 0.0,
            Weight::SubExp { r, .. } => *r == 0.0,
            Weight::BlockLift { inner, .. } | Weight::Reciprocal { inner } => inner.is_constant(),
            Weight::Product { factors } => factors.iter().all(Weight::is_constant),
        }
    }

    /// Smallest coordinate dimension the tree can be evaluated on.
    pub fn required_dim(&self) -> usize {
        match self {
            Weight::BlockLift { offsets, lengths, .. } => {
                offsets.iter().zip(lengths).map(|(o, l)| o + l).max().unwrap_or(0)
            }
            Weight::Product { factors } => factors.iter().map(Weight::required_dim).max().unwrap_or(0),
            Weight::Reciprocal { inner } => inner.required_dim(),
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Weight::PolyBracket { s } if !s.is_finite() => {
                Err(Error::InvalidWeight(format!("poly_bracket exponent {s} is not finite")))
            }
            Weight::SubExp { r, theta } => {
                if !r.is_finite() {
                    return Err(Error::InvalidWeight(format!("sub_exp rate {r} is not finite")));
                }
                if !(*theta > 0.0 && *theta <= 1.0) {
                    return Err(Error::InvalidWeight(format!("sub_exp theta {theta} outside (0, 1]")));
                }
                Ok(())
            }
            Weight::Constant { c } if !(c.is_finite() && *c > 0.0) => {
                Err(Error::InvalidWeight(format!("constant {c} must be positive and finite")))
            }
            Weight::BlockLift { offsets, lengths, inner } => {
                if offsets.len() != lengths.len() || offsets.is_empty() {
                    return Err(Error::InvalidWeight("block_lift needs matching, non-empty offsets and lengths".into()));
                }
                let mut blocks: Vec<(usize, usize)> =
                    offsets.iter().zip(lengths).map(|(&o, &l)| (o, o + l)).collect();
                blocks.sort_unstable();
                if blocks.windows(2).any(|w| w[0].1 > w[1].0) {
                    return Err(Error::InvalidWeight("block_lift blocks overlap".into()));
                }
                inner.validate()
            }
            Weight::Product { factors } => factors.iter().try_for_each(Weight::validate),
            Weight::Reciprocal { inner } => inner.validate(),
            _ => Ok(()),
        }
    }

    /// `ln ω(x)`.
    pub fn ln_eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Weight::PolyBracket { s } => 0.5 * s * (x.iter().map(|v| v * v).sum::<f64>()).ln_1p(),
            Weight::SubExp { r, theta } => {
                let n = norm(x);
                if n == 0.0 {
                    0.0
                } else {
                    r * n.powf(*theta)
                }
            }
            Weight::Constant { c } => c.ln(),
            Weight::Reciprocal { inner } => -inner.ln_eval(x)?,
            Weight::Product { factors } => {
                let mut acc = 0.0;
                for f in factors {
                    acc += f.ln_eval(x)?;
                }
                acc
            }
            Weight::BlockLift { offsets, lengths, inner } => {
                let mut sub = Vec::with_capacity(lengths.iter().sum());
                for (&o, &l) in offsets.iter().zip(lengths) {
                    if o + l > x.len() {
                        return Err(Error::DimensionMismatch { expected: o + l, got: x.len() });
                    }
                    sub.extend_from_slice(&x[o..o + l]);
                }
                inner.ln_eval(&sub)?
            }
        })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.ln_eval(x).map(f64::exp)
    }

    /// A weight `v` with `ω(x + y) ≤ ω(x) v(y)` for all `x, y`.
    ///
    /// Built node by node: Peetre's inequality for brackets
    /// (`⟨x+y⟩^s ≤ 2^{|s|/2} ⟨x⟩^s ⟨y⟩^{|s|}`), subadditivity of `|x|^θ` for
    /// `θ ≤ 1`, and `1/ω(x+y) ≤ v(-y)/ω(x)` for reciprocals. Every partner is
    /// even, so the sign flip in the reciprocal rule is immaterial.
    pub fn submultiplicative_partner(&self) -> Weight {
        match self {
            Weight::PolyBracket { s } => {
                if *s == 0.0 {
                    Weight::one()
                } else {
                    Weight::product(vec![Weight::constant(2f64.powf(s.abs() / 2.0)), Weight::poly(s.abs())])
                }
            }
            Weight::SubExp { r, theta } => Weight::sub_exp(r.abs(), *theta),
            Weight::Constant { .. } => Weight::one(),
            Weight::Reciprocal { inner } => inner.submultiplicative_partner(),
            Weight::Product { factors } => {
                Weight::product(factors.iter().map(Weight::submultiplicative_partner).collect())
            }
            Weight::BlockLift { offsets, lengths, inner } => Weight::BlockLift {
                offsets: offsets.clone(),
                lengths: lengths.clone(),
                inner: Box::new(inner.submultiplicative_partner()),
            },
        }
    }
}

pub fn eval_weight(w: &Weight, x: &[f64]) -> Result<f64> {
    w.eval(x)
}

fn ln_moderate_ratio(w: &Weight, r: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    Ok(w.ln_eval(&xy)? - w.ln_eval(x)? - r * norm(y))
}

/// Largest sampled value of `ω(x+y) / (ω(x) e^{r|y|})` for `x, y` uniform in `[-R, R]^dim`.
pub fn moderateness_ratio(
    w: &Weight,
    r: f64,
    dim: usize,
    sample_count: usize,
    box_radius: f64,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    for _ in 0..sample_count.max(1) {
        for v in x.iter_mut().chain(y.iter_mut()) {
            *v = rng.random_range(-box_radius..=box_radius);
        }
        best = best.max(ln_moderate_ratio(w, r, &x, &y)?);
        // Every sampled x is also paired with y = 0.
        let zero = vec![0.0; dim];
        best = best.max(ln_moderate_ratio(w, r, &x, &zero)?);
    }
    Ok(best.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeratenessReport {
    pub max_ratio: f64,
    pub points_per_axis: usize,
    pub box_radius: f64,
}

/// Deterministic sweep of the moderateness ratio over all pairs of a
/// `points_per_axis^dim` grid on `[-R, R]^dim`.
pub fn moderateness_sweep(
    w: &Weight,
    r: f64,
    dim: usize,
    box_radius: f64,
    points_per_axis: usize,
) -> Result<ModeratenessReport> {
    let m = points_per_axis.max(2);
    let axis: Vec<f64> = (0..m).map(|i| -box_radius + 2.0 * box_radius * i as f64 / (m - 1) as f64).collect();
    let total = m.pow(dim as u32);
    let point = |flat: usize| -> Vec<f64> {
        crate::lattice::unravel(flat, m, dim).into_iter().map(|i| axis[i]).collect()
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..total {
        let x = point(i);
        for j in 0..total {
            best = best.max(ln_moderate_ratio(w, r, &x, &point(j))?);
        }
    }
    Ok(ModeratenessReport { max_ratio: best.exp(), points_per_axis: m, box_radius })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceWeightReport {
    pub c_theta: f64,
    pub r_exponent: Exponent,
    pub finite: bool,
    /// Lattice quasi-norms on boxes of half-width `R, 2R, 4R`.
    pub extension_values: Vec<f64>,
    pub extension_radii: Vec<f64>,
}

fn lattice_sup_norm(theta: &Weight, r: Exponent, xi2: &[Vec<f64>], cell: f64, xi3_points: &[Vec<f64>]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for xi3 in xi3_points {
        let mut acc = 0.0;
        let mut sup: f64 = 0.0;
        for p in xi2 {
            let mut arg = p.clone();
            arg.extend_from_slice(xi3);
            let v = theta.eval(&arg)?;
            if r.is_infinite() {
                sup = sup.max(v);
            } else {
                acc += v.powf(r.value());
            }
        }
        let val = if r.is_infinite() { sup } else { (acc * cell).powf(1.0 / r.value()) };
        best = best.max(val);
    }
    Ok(best)
}

fn box_points(d: usize, step: f64, radius: f64) -> Vec<Vec<f64>> {
    let k = (radius / step).floor() as i64;
    let m = (2 * k + 1) as usize;
    (0..m.pow(d as u32))
        .map(|flat| {
            crate::lattice::unravel(flat, m, d).into_iter().map(|i| (i as i64 - k) as f64 * step).collect()
        })
        .collect()
}

/// `C_ϑ = sup_{ξ₃} ‖ϑ(·, ξ₃)‖_{L^r}` as a Riemann sum over the `ξ₂` grid.
///
/// The constant is flagged finite when the lattice quasi-norm changes by less
/// than 5% under each of two doublings of the `ξ₂` box, starting from a
/// half-width of `max(10, grid half-extent)`.
pub fn trace_weight_constant(
    theta: &Weight,
    r: Exponent,
    xi3_grid: Option<&GridSpec>,
    xi2_grid: &GridSpec,
) -> Result<TraceWeightReport> {
    if r.value() <= 0.0 {
        return Err(Error::NonPositiveR(r.value()));
    }
    let d2 = xi2_grid.dim();
    let d3 = xi3_grid.map_or(0, |g| g.dim());
    let need = theta.required_dim();
    if need > d2 + d3 {
        return Err(Error::DimensionMismatch { expected: d2 + d3, got: need });
    }
    let xi3_points: Vec<Vec<f64>> = match xi3_grid {
        Some(g) => (0..g.len()).map(|i| g.point(i)).collect(),
        None => vec![Vec::new()],
    };
    let xi2: Vec<Vec<f64>> = (0..xi2_grid.len()).map(|i| xi2_grid.point(i)).collect();
    let step = xi2_grid.step();
    let cell = xi2_grid.cell();
    let c_theta = lattice_sup_norm(theta, r, &xi2, cell, &xi3_points)?;

    let base = (xi2_grid.n() as f64 * step / 2.0).max(10.0);
    let radii = vec![base, 2.0 * base, 4.0 * base];
    let mut values = Vec::with_capacity(3);
    for &rad in &radii {
        values.push(lattice_sup_norm(theta, r, &box_points(d2, step, rad), cell, &xi3_points)?);
    }
    let finite = values.iter().all(|v| v.is_finite())
        && values.windows(2).all(|w| (w[1] - w[0]).abs() <= 0.05 * w[0].abs());
    Ok(TraceWeightReport { c_theta, r_exponent: r, finite, extension_values: values, extension_radii: radii })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn eval_examples() {
        assert_eq!(Weight::poly(3.5).eval(&[0.0, 0.0]).unwrap(), 1.0);
        let v = Weight::sub_exp(2.0, 1.0).eval(&[0.6, 0.8]).unwrap();
        assert!((v - E * E).abs() < 1e-13);
        let w = Weight::product(vec![Weight::poly(2.0), Weight::reciprocal(Weight::poly(2.0))]);
        for x in [-3.0, 0.1, 7.5] {
            assert!((w.eval(&[x]).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn block_lift_dimension_checks() {
        let w = Weight::lift(2, 2, Weight::poly(1.0));
        assert_eq!(w.required_dim(), 4);
        assert!(matches!(w.eval(&[0.0; 3]), Err(Error::DimensionMismatch { .. })));
        let v = w.eval(&[9.0, 9.0, 3.0, 4.0]).unwrap();
        assert!((v - 26f64.sqrt()).abs() < 1e-13);
        let bad = Weight::BlockLift { offsets: vec![0, 1], lengths: vec![2, 1], inner: Box::new(Weight::one()) };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn validation() {
        assert!(Weight::sub_exp(1.0, 1.5).validate().is_err());
        assert!(Weight::constant(0.0).validate().is_err());
        assert!(Weight::omega_rs(Weight::poly(1.0), 2.0, 2.0, 1).validate().is_ok());
    }

    #[test]
    fn multiplicative_over_products() {
        let a = Weight::poly(1.7);
        let b = Weight::sub_exp(0.9, 0.5);
        let p = Weight::product(vec![a.clone(), b.clone()]);
        for x in [[0.3, -1.2], [4.0, 2.0], [-6.5, 0.1]] {
            let lhs = p.eval(&x).unwrap();
            let rhs = a.eval(&x).unwrap() * b.eval(&x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            let rec = Weight::reciprocal(a.clone()).eval(&x).unwrap();
            assert!((rec * a.eval(&x).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn omega_families() {
        let w = Weight::omega_r(Weight::poly(2.0), 1.0, 1);
        let v = w.eval(&[1.0, 2.0]).unwrap();
        assert!((v - 2.0 / 5f64.sqrt()).abs() < 1e-14);
        let w = Weight::omega_rs(Weight::one(), 1.0, 2.0, 1);
        let v = w.eval(&[5.0, 4.0]).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn moderateness_examples() {
        assert_eq!(moderateness_ratio(&Weight::one(), 0.7, 2, 200, 5.0, 1).unwrap(), 1.0);
        let m = moderateness_ratio(&Weight::sub_exp(1.0, 1.0), 1.0, 1, 2000, 5.0, 2).unwrap();
        assert!(m <= 1.0 + 1e-12);
    }

    #[test]
    fn moderateness_sweep_poly() {
        // Oracle: scalar max over the 41 x 41 grid on [-5, 5], computed separately
        // with numpy; attained at x = -0.25, y = -5 (the box corner).
        let rep = moderateness_sweep(&Weight::poly(3.0), 0.5, 1, 5.0, 41).unwrap();
        assert!((rep.max_ratio - 11.441_019_169_848_333).abs() < 1e-11, "{}", rep.max_ratio);
        let sampled = moderateness_ratio(&Weight::poly(3.0), 0.5, 1, 20_000, 5.0, 3).unwrap();
        assert!(sampled.is_finite() && sampled > 0.9 * rep.max_ratio);
    }

    #[test]
    fn peetre_partner() {
        for s in [-3.0, -0.5, 1.0, 2.0, 4.5] {
            let w = Weight::poly(s);
            let v = w.submultiplicative_partner();
            for x in [-4.0, -1.0, 0.0, 0.5, 3.0] {
                for y in [-4.0, -1.0, 0.0, 0.5, 3.0] {
                    let lhs = w.eval(&[x + y]).unwrap();
                    let rhs = w.eval(&[x]).unwrap() * v.eval(&[y]).unwrap();
                    assert!(lhs <= rhs * (1.0 + 1e-12), "s={s} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn trace_constant_examples() {
        let g2 = GridSpec::self_dual(1, 32).unwrap();
        let rep = trace_weight_constant(&Weight::one(), Exponent::INF, None, &g2).unwrap();
        assert_eq!(rep.c_theta, 1.0);
        assert!(rep.finite);

        let sob = |s: f64| Weight::reciprocal(Weight::poly(s));
        let rep = trace_weight_constant(&sob(2.0), Exponent::new(1.0).unwrap(), None, &g2).unwrap();
        assert!(rep.finite, "{rep:?}");
        let rep = trace_weight_constant(&sob(0.5), Exponent::new(1.0).unwrap(), None, &g2).unwrap();
        assert!(!rep.finite, "{rep:?}");

        assert!(matches!(
            trace_weight_constant(&sob(2.0), Exponent(-1.0), None, &g2),
            Err(Error::NonPositiveR(_))
        ));
    }

    #[test]
    fn trace_constant_with_xi3() {
        // ϑ(ξ₂, ξ₃) = ⟨(ξ₂, ξ₃)⟩^{-s} ⟨ξ₃⟩^{s₀} with s = 2, s₀ = 1: s₀ ≤ s - d₂/r holds for r = 1.
        let theta = Weight::product(vec![Weight::poly(-2.0), Weight::lift(1, 1, Weight::poly(1.0))]);
        let g = GridSpec::self_dual(1, 16).unwrap();
        let rep = trace_weight_constant(&theta, Exponent::new(1.0).unwrap(), Some(&g), &g).unwrap();
        assert!(rep.finite, "{rep:?}");
        // Enlarging ϑ never decreases the constant.
        let bigger = Weight::product(vec![theta.clone(), Weight::constant(1.5)]);
        let rep2 = trace_weight_constant(&bigger, Exponent::new(1.0).unwrap(), Some(&g), &g).unwrap();
        assert!(rep2.c_theta >= rep.c_theta);
    }
}
