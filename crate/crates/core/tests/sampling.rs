use perconoise::experiments::{chi_square, chi_square_sf};
use perconoise::sampling::{p_subset_mask, sample_poisson, two_stage_sample};
use perconoise::{Rect, RngStream};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_stream_same_points(seed in any::<u64>(), side in 1.0f64..12.0, lambda in 0.0f64..2.0) {
        let region = Rect::square(side).unwrap();
        let a = sample_poisson(region, lambda, RngStream::new(seed, 3)).unwrap();
        let b = sample_poisson(region, lambda, RngStream::new(seed, 3)).unwrap();
        prop_assert_eq!(&a.points, &b.points);
        prop_assert!(a.points.iter().all(|&p| region.contains(p)));
    }

    #[test]
    fn two_stage_eta_is_a_subset(seed in any::<u64>(), p in 0.05f64..=1.0) {
        let region = Rect::square(8.0).unwrap();
        let s = two_stage_sample(0.5, p, region, RngStream::new(seed, 0)).unwrap();
        prop_assert_eq!(s.included.len(), s.parent.len());
        let eta = s.eta();
        let expected: Vec<_> = s.parent.points.iter().zip(&s.included).filter(|(_, &b)| b).map(|(p, _)| *p).collect();
        prop_assert_eq!(eta.points, expected);
    }

    #[test]
    fn full_subset_keeps_everything(seed in any::<u64>(), n in 0usize..200) {
        let mask = p_subset_mask(n, 1.0, RngStream::new(seed, 1)).unwrap();
        prop_assert!(mask.iter().all(|&b| b));
        let none = p_subset_mask(n, 0.0, RngStream::new(seed, 1)).unwrap();
        prop_assert!(none.iter().all(|&b| !b));
    }
}

#[test]
fn replicates_and_children_differ() {
    let region = Rect::square(10.0).unwrap();
    let root = RngStream::new(9, 0);
    let a = sample_poisson(region, 1.0, root.replicate(0)).unwrap();
    let b = sample_poisson(region, 1.0, root.replicate(1)).unwrap();
    let c = sample_poisson(region, 1.0, root.child(0)).unwrap();
    assert_ne!(a.points, b.points);
    assert_ne!(a.points, c.points);
}

/// Each element of a p-subset is included with probability p, and the
/// inclusions of two elements are independent.
#[test]
fn thinning_marginals_and_pairs() {
    let (n, p, reps) = (6usize, 0.3, 20_000u64);
    let root = RngStream::new(41, 0);
    let mut ones = vec![0.0; n];
    let mut pair = [0.0f64; 4];
    for r in 0..reps {
        let m = p_subset_mask(n, p, root.replicate(r)).unwrap();
        for (i, &b) in m.iter().enumerate() {
            ones[i] += f64::from(u8::from(b));
        }
        pair[usize::from(m[0]) * 2 + usize::from(m[3])] += 1.0;
    }
    let r = reps as f64;
    for &k in &ones {
        let stat = chi_square(&[k, r - k], &[p * r, (1.0 - p) * r]);
        assert!(chi_square_sf(stat, 1.0) > 1e-4, "marginal count {k}");
    }
    let expected = [
        (1.0 - p) * (1.0 - p) * r,
        (1.0 - p) * p * r,
        p * (1.0 - p) * r,
        p * p * r,
    ];
    let stat = chi_square(&pair, &expected);
    assert!(chi_square_sf(stat, 3.0) > 1e-4, "pair table {pair:?}");
}

/// `|η|` from the two-stage construction is Poisson with mean `λ·area`.
#[test]
fn two_stage_count_is_poisson() {
    let (lambda, p, side) = (0.5, 0.25, 3.0);
    let region = Rect::square(side).unwrap();
    let mean = lambda * side * side;
    let reps = 10_000u64;
    let cap = 10usize;
    let mut counts = vec![0.0; cap + 1];
    let root = RngStream::new(77, 0);
    for r in 0..reps {
        let s = two_stage_sample(lambda, p, region, root.replicate(r)).unwrap();
        let k = s.included.iter().filter(|&&b| b).count().min(cap);
        counts[k] += 1.0;
    }
    let mut probs: Vec<f64> = Vec::with_capacity(cap + 1);
    let mut term = (-mean as f64).exp();
    for k in 0..cap {
        probs.push(term);
        term *= mean / (k + 1) as f64;
    }
    probs.push(1.0 - probs.iter().sum::<f64>());
    let expected: Vec<f64> = probs.iter().map(|q| q * reps as f64).collect();
    let stat = chi_square(&counts, &expected);
    assert!(chi_square_sf(stat, cap as f64) > 1e-4, "counts {counts:?}");
}
