use perconoise::geometry::{annulus_vacant_circuit, occupied_horizontal_crossing, Annulus, ADJACENCY, TOL};
use perconoise::sampling::{dist_to_segment, p_subset_mask, sample_poisson};
use perconoise::water::{run_water_algorithm, StartSide, WaterAlgorithm};
use perconoise::{Point, Rect, RngStream};
use proptest::prelude::*;

fn sample_b(n: f64, intensity: f64, seed: u64) -> perconoise::PointSet {
    sample_poisson(Rect::square(n + 2.0).unwrap(), intensity, RngStream::new(seed, 0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_is_the_crossing(seed in any::<u64>(), p in 0.2f64..0.9, left in any::<bool>()) {
        let n = 12.0;
        let b = sample_b(n, 1.2, seed);
        let eta = p_subset_mask(b.len(), p, RngStream::new(seed, 1)).unwrap();
        let side = if left { StartSide::Left } else { StartSide::Right };
        let t = run_water_algorithm(&b, &eta, n, side).unwrap();
        let rect = Rect::square(n).unwrap();
        prop_assert_eq!(t.output, occupied_horizontal_crossing(&b.select(&eta), &rect));
    }

    #[test]
    fn rounds_grow_and_terminate(seed in any::<u64>(), p in 0.2f64..0.9) {
        let n = 12.0;
        let b = sample_b(n, 1.2, seed);
        let eta = p_subset_mask(b.len(), p, RngStream::new(seed, 1)).unwrap();
        let t = run_water_algorithm(&b, &eta, n, StartSide::Left).unwrap();
        prop_assert!(t.rounds <= b.len() + 1);
        prop_assert_eq!(t.history.len(), t.rounds);
        // Each round's queries are fresh, activations are exactly the queried
        // points of η, and the process stops on the first empty activation.
        let mut seen = vec![false; b.len()];
        for (k, r) in t.history.iter().enumerate() {
            for &i in &r.queried {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
            let expected: Vec<usize> = r.queried.iter().copied().filter(|&i| eta[i]).collect();
            prop_assert_eq!(&r.activated, &expected);
            prop_assert_eq!(r.activated.is_empty(), k + 1 == t.rounds);
        }
        prop_assert!(t.active_final.iter().all(|&i| eta[i] && seen[i]));
    }

    #[test]
    fn queries_stay_near_water(seed in any::<u64>(), p in 0.2f64..0.9) {
        let n = 12.0;
        let b = sample_b(n, 1.2, seed);
        let eta = p_subset_mask(b.len(), p, RngStream::new(seed, 1)).unwrap();
        let t = run_water_algorithm(&b, &eta, n, StartSide::Left).unwrap();
        let half = 0.5 * (n + 2.0);
        let (a0, a1) = (Point::new(-0.5 * n, -half), Point::new(-0.5 * n, half));
        let reach = ADJACENCY + TOL;
        for &i in &t.queried {
            let q = b.points[i];
            let near_line = dist_to_segment(q, a0, a1) <= reach;
            let near_active = t.active_final.iter().any(|&j| b.points[j].dist(q) <= reach);
            prop_assert!(near_line || near_active);
        }
    }

    #[test]
    fn adding_to_eta_never_shrinks_the_water(seed in any::<u64>(), p in 0.2f64..0.8) {
        let n = 10.0;
        let b = sample_b(n, 1.2, seed);
        let eta = p_subset_mask(b.len(), p, RngStream::new(seed, 1)).unwrap();
        let extra = p_subset_mask(b.len(), 0.2, RngStream::new(seed, 2)).unwrap();
        let more: Vec<bool> = eta.iter().zip(&extra).map(|(a, b)| *a || *b).collect();
        let alg = WaterAlgorithm::new(&b.points, n, StartSide::Left).unwrap();
        let small = alg.run(&eta);
        let big = alg.run(&more);
        prop_assert!(small.active_final.iter().all(|i| big.active_final.contains(i)));
    }
}

/// With a vacant circuit in the annulus of inner half-width 4 around a unit
/// square `S`, the water started outside the annulus never reaches `S`.
#[test]
fn vacant_circuit_shields_the_centre() {
    let n = 24.0;
    let ell = 4.0;
    let mut shielded = 0;
    for seed in 0..200u64 {
        let b = sample_b(n, 0.3, seed);
        let eta = p_subset_mask(b.len(), 0.5, RngStream::new(seed, 1)).unwrap();
        let center = Point::new(6.0, -3.0 + 0.03 * seed as f64);
        let ann = Annulus::new(center, ell).unwrap();
        if !annulus_vacant_circuit(&b.select(&eta), &ann) {
            continue;
        }
        shielded += 1;
        let square = Rect::new(center, 1.0, 1.0).unwrap();
        let t = run_water_algorithm(&b, &eta, n, StartSide::Left).unwrap();
        for &i in &t.queried {
            assert!(!square.contains(b.points[i]), "seed {seed}: point {i} of S queried");
        }
    }
    assert!(shielded > 20, "only {shielded} configurations had a vacant circuit");
}
