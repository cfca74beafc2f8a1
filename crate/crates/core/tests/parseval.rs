mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sisparse::linalg::{complex_gaussian, random_unitary, CMat, C64};
use sisparse::sispace::{signal_norm, CoeffSpectra, FrequencyGrid};

fn case(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=5usize);
    let period = rng.random_range(0.25..4.0);
    let u = random_unitary(n, &mut rng);
    let z: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
    let seqs: Vec<Vec<C64>> = (0..n)
        .map(|_| {
            let len = rng.random_range(0..=12usize);
            complex_gaussian(1, len, &mut rng).iter().copied().collect()
        })
        .collect();
    let grid = FrequencyGrid::new(16).unwrap();
    let spectral = signal_norm(&CoeffSpectra::from_sequences(&seqs, &grid).unwrap(), &grid);
    (common::box_signal_norm(&seqs, &u, &z, period), spectral)
}

#[test]
fn single_box_has_unit_norm() {
    let u = CMat::identity(3, 3);
    let a = vec![vec![], vec![C64::new(1.0, 0.0)], vec![]];
    assert!((common::box_signal_norm(&a, &u, &[0, 0, 0], 2.0) - 1.0).abs() < 1e-14);
}

#[test]
fn overlapping_shifts_add_in_energy() {
    // a[n] = (1, 1) on one generator is two disjoint boxes
    let u = CMat::identity(1, 1);
    let a = vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]];
    assert!((common::box_signal_norm(&a, &u, &[0], 1.0) - 2f64.sqrt()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn time_domain_norm_matches_spectral_norm(seed in any::<u64>()) {
        let (brute, spectral) = case(seed);
        prop_assert!((brute - spectral).abs() <= 1e-9 * spectral.max(1e-300) || (brute == 0.0 && spectral == 0.0));
    }
}
