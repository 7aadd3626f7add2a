use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modspace::gabor::{frame_bounds, gabor_coefficients, gabor_synthesis, stft, GaborSystem, Window};
use modspace::{Error, GridSpec, SampledField};

fn noise(g: GridSpec, seed: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SampledField::new(g, (0..g.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stft_is_linear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let g = GridSpec::self_dual(1, 16).unwrap();
        let phi = Window::gaussian(&g);
        let (f, h) = (noise(g, seed), noise(g, seed ^ 1));
        let c = Complex64::new(re, im);
        let combo = f.scale(c).add(&h).unwrap();
        let lhs = stft(&combo, &phi).unwrap();
        let (vf, vh) = (stft(&f, &phi).unwrap(), stft(&h, &phi).unwrap());
        for ((l, a), b) in lhs.values().iter().zip(vf.values()).zip(vh.values()) {
            prop_assert!((l - (c * a + b)).norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_dual_reconstructs(seed in any::<u64>(), a in 1usize..=4, b in 1usize..=4) {
        let g = GridSpec::self_dual(1, 24).unwrap();
        prop_assume!(24 % a == 0 && 24 % b == 0);
        let system = GaborSystem::new(Window::gaussian(&g), a, b).unwrap().with_canonical_dual().unwrap();
        let f = noise(g, seed);
        let back = gabor_synthesis(&gabor_coefficients(&f, &system).unwrap(), system.dual().unwrap()).unwrap();
        let err = back.values().iter().zip(f.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9 * f.max_abs(), "strides ({a},{b}): {err}");
    }
}

#[test]
fn frame_bounds_are_ordered_and_tight_on_full_lattice() {
    let g = GridSpec::self_dual(1, 16).unwrap();
    let full = frame_bounds(&GaborSystem::new(Window::gaussian(&g), 1, 1).unwrap()).unwrap();
    assert!((full.upper - full.lower).abs() < 1e-10 * full.upper);
    let sparse = frame_bounds(&GaborSystem::new(Window::gaussian(&g), 2, 4).unwrap()).unwrap();
    assert!(sparse.lower > 0.0 && sparse.lower <= sparse.upper);
    assert!(sparse.condition() >= 1.0);
}

#[test]
fn undersampled_lattice_is_not_a_frame() {
    let g = GridSpec::self_dual(1, 16).unwrap();
    assert!(matches!(GaborSystem::new(Window::gaussian(&g), 8, 4), Err(Error::NotAFrame(_))));
}
