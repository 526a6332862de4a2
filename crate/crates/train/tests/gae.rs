#[path = "support/gae_oracle.rs"]
mod gae_oracle;

use gae_oracle::{direct_gae, random_sequence};
use lognav_train::gae::compute_gae;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn recursion_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (r, v, d, last) = random_sequence(&mut rng, 50);
        let est = compute_gae(&r, &v, &d, last, 0.99, 0.95).unwrap();
        let oracle = direct_gae(&r, &v, &d, last, 0.99, 0.95);
        for (a, b) in est.advantages.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
        for ((ret, a), v) in est.returns.iter().zip(&est.advantages).zip(&v) {
            assert_eq!(*ret, a + v);
        }
    }
}

#[test]
fn lambda_one_gives_discounted_return_minus_value() {
    let r = [1.0, 2.0, 3.0];
    let v = [0.5, -1.0, 2.0];
    let est = compute_gae(&r, &v, &[false, false, true], 9.0, 0.9, 1.0).unwrap();
    let g0 = 1.0 + 0.9 * 2.0 + 0.81 * 3.0;
    assert!((est.advantages[0] - (g0 - 0.5)).abs() < 1e-12);
    assert!((est.returns[0] - g0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn recursion_matches_direct_sum_any_coefficients(
        seed in any::<u64>(),
        len in 1usize..80,
        gamma in 0.0f64..=1.0,
        lambda in 0.0f64..=1.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r, v, d, last) = random_sequence(&mut rng, len);
        let est = compute_gae(&r, &v, &d, last, gamma, lambda).unwrap();
        let oracle = direct_gae(&r, &v, &d, last, gamma, lambda);
        for (a, b) in est.advantages.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    /// A terminal step cuts the credit chain: advantages before it ignore
    /// everything after it.
    #[test]
    fn terminal_isolates_prefix(seed in any::<u64>(), cut in 1usize..30, tail in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r, v, mut d, last) = random_sequence(&mut rng, cut + tail);
        d[..cut].fill(false);
        d[cut - 1] = true;
        let full = compute_gae(&r, &v, &d, last, 0.99, 0.95).unwrap();
        let prefix = compute_gae(&r[..cut], &v[..cut], &d[..cut], 123.0, 0.99, 0.95).unwrap();
        prop_assert_eq!(&full.advantages[..cut], &prefix.advantages[..]);
    }
}
