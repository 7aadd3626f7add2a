use modspace::trace::{trace_bound_experiment, DimSplit, TraceExperimentConfig};
use modspace::{Error, Exponent, Weight};

fn small(mut cfg: TraceExperimentConfig) -> TraceExperimentConfig {
    cfg.resolutions = vec![8, 12];
    cfg.random_members = 4;
    cfg.adversarial_members = 2;
    cfg
}

#[test]
fn sobolev_trace_ratio_is_stable() {
    let cfg = small(TraceExperimentConfig::sobolev(DimSplit::at_origin(1, 1, 0).unwrap(), 1.0, 0.0));
    let r = trace_bound_experiment(&cfg).unwrap();
    assert!(r.results.iter().all(|x| x.sup_ratio.is_finite() && x.sup_ratio > 0.0 && x.right_inverse_exact));
    assert!(r.growth_factor < 1.5, "{}", r.growth_factor);
}

#[test]
fn sobolev_below_threshold_is_rejected() {
    // s = 1/4 ≤ d₂/2 leaves ⟨ξ₂⟩^{-s} outside L².
    let cfg = small(TraceExperimentConfig::sobolev(DimSplit::at_origin(1, 1, 0).unwrap(), 0.25, 0.0));
    assert!(trace_bound_experiment(&cfg).is_err());
    let mut relaxed = cfg;
    relaxed.enforce_theta = false;
    assert!(trace_bound_experiment(&relaxed).is_ok());
}

#[test]
fn exponent_count_must_match_dimension() {
    let mut cfg = small(TraceExperimentConfig::sobolev(DimSplit::at_origin(1, 1, 0).unwrap(), 1.0, 0.0));
    cfg.p = vec![Exponent(2.0)];
    cfg.theta = Weight::one();
    assert!(matches!(trace_bound_experiment(&cfg), Err(Error::DimensionMismatch { .. })));
}
