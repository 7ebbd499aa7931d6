use perconoise::binomial::pmf;
use perconoise::fourier::{
    influences, ii_p, noise_correlation_exact, random_function, random_monotone, spectrum, BooleanFn,
};
use perconoise::hypergraph::{binmax_check, chernoff_check};
use perconoise::RngStream;
use proptest::prelude::*;

fn any_fn() -> impl Strategy<Value = BooleanFn> {
    (1usize..=7, 0.05f64..0.95, any::<u64>(), any::<bool>()).prop_map(|(n, p, seed, mono)| {
        let mut rng = RngStream::new(seed, 0).rng();
        if mono {
            random_monotone(n, p, &mut rng).unwrap()
        } else {
            random_function(n, p, &mut rng).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn parseval_and_inversion(f in any_fn()) {
        let s = spectrum(&f);
        prop_assert!((s.total_mass() - f.second_moment()).abs() < 1e-10);
        prop_assert!((s.coefficient(0) - f.mean()).abs() < 1e-10);
        for (w, &v) in f.table().iter().enumerate() {
            prop_assert!((s.reconstruct(w as u32) - v).abs() < 1e-10);
        }
        let levels = s.level_masses();
        prop_assert_eq!(levels.len(), f.n() + 1);
        prop_assert!((levels[1..].iter().sum::<f64>() - f.variance()).abs() < 1e-10);
    }

    #[test]
    fn noise_covariance_decreases_with_epsilon(f in any_fn(), e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = noise_correlation_exact(&f, lo).unwrap();
        let b = noise_correlation_exact(&f, hi).unwrap();
        prop_assert!(a.spectral + 1e-12 >= b.spectral);
        prop_assert!((a.spectral - a.direct).abs() < 1e-10);
        let zero = noise_correlation_exact(&f, 0.0).unwrap();
        let one = noise_correlation_exact(&f, 1.0).unwrap();
        prop_assert!((zero.spectral - f.variance()).abs() < 1e-10);
        prop_assert!(one.spectral.abs() < 1e-12);
    }

    #[test]
    fn text_round_trip(f in any_fn()) {
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        let back = BooleanFn::read_text(buf.as_slice()).unwrap();
        prop_assert_eq!(back, f);
    }

    /// For monotone functions the level-one coefficients are scaled influences
    /// (negative, since the character is decreasing in its bit).
    #[test]
    fn monotone_influences_from_level_one(n in 1usize..=7, p in 0.05f64..0.95, seed in any::<u64>()) {
        let f = random_monotone(n, p, &mut RngStream::new(seed, 0).rng()).unwrap();
        let s = spectrum(&f);
        let inf = influences(&f);
        for (i, &x) in inf.iter().enumerate() {
            prop_assert!((s.coefficient(1 << i) + (p * (1.0 - p)).sqrt() * x).abs() < 1e-10);
        }
        let squares: f64 = inf.iter().map(|x| x * x).sum();
        prop_assert!((ii_p(&f) - squares).abs() < 1e-12);
    }

    #[test]
    fn chernoff_small_n(n in 1u64..=60, half in any::<bool>(), frac in 0.01f64..=1.0) {
        let p = if half { 0.5 } else { 0.1 };
        let a = frac * p * n as f64 / 2.0;
        let c = chernoff_check(n, p, a).unwrap();
        prop_assert!(!c.violated(), "n={} p={} a={}: {:?}", n, p, a, c);
    }

    #[test]
    fn binomial_mode_bound(n in 1u64..=1000, p in 0.001f64..0.999) {
        let c = binmax_check(n, p, 1.0).unwrap();
        prop_assert!(!c.violated(), "n={} p={}: {:?}", n, p, c);
        let brute = (0..=n).map(|k| pmf(n, p, k)).fold(0.0, f64::max);
        prop_assert!((brute - c.lhs).abs() < 1e-12);
    }
}

/// For the parity of `n` fair bits all variance sits on the top level.
#[test]
fn parity_lives_on_the_top_level() {
    for n in 1..=10 {
        let f = BooleanFn::parity(n, 0.5).unwrap();
        let levels = spectrum(&f).level_masses();
        assert!((levels[n] - 0.25).abs() < 1e-12, "n={n}: {levels:?}");
        for (k, &m) in levels.iter().enumerate().take(n).skip(1) {
            assert!(m.abs() < 1e-12, "n={n} level {k}: {m}");
        }
    }
}

#[test]
fn dictator_lives_on_level_one() {
    for p in [0.2, 0.5, 0.8] {
        let f = BooleanFn::dictator(5, p, 2).unwrap();
        let levels = spectrum(&f).level_masses();
        assert!((levels[1] - p * (1.0 - p)).abs() < 1e-12);
        assert!(levels[2..].iter().all(|m| m.abs() < 1e-12));
    }
}
