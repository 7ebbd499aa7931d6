use perconoise::discretize::{bad_event, coupled_replicate, export_crossing_hypergraph, q_of, snap, Lattice};
use perconoise::experiments::{chi_square, chi_square_sf};
use perconoise::hypergraph::r_h_all;
use perconoise::sampling::sample_poisson;
use perconoise::RngStream;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn disagreement_needs_a_bad_event(seed in any::<u64>(), index in 0u64..1000, p in 0.2f64..=1.0) {
        let lattice = Lattice::new(3.0, 3.0, 0.05).unwrap();
        let r = coupled_replicate(0.36, p, &lattice, RngStream::new(seed, 0), index).unwrap();
        prop_assert!(r.bad.is_some() || (!r.disagrees() && r.graphs_identical), "{:?}", r);
    }

    #[test]
    fn snapping_lands_in_the_own_cell(seed in any::<u64>(), delta in 0.05f64..0.5) {
        let lattice = Lattice::new(2.0, 1.0, delta).unwrap();
        let b = sample_poisson(lattice.cover_rect(), 2.0, RngStream::new(seed, 0)).unwrap();
        let s = snap(&b.points, &lattice).unwrap();
        for (x, &i) in b.points.iter().zip(&s.preimage) {
            let site = lattice.site(i);
            prop_assert!((x.x - site.x).abs() <= 0.5 * delta + 1e-12);
            prop_assert!((x.y - site.y).abs() <= 0.5 * delta + 1e-12);
        }
        if s.sites.len() < b.len() {
            prop_assert!(bad_event(&b.points, &lattice).unwrap().is_some());
        }
    }
}

/// Sampling `B` on the cover occupies each site independently with probability `q`.
#[test]
fn sites_are_occupied_with_probability_q() {
    let (lambda, p, delta) = (0.36, 0.5, 0.6);
    let lattice = Lattice::new(1.0, 1.0, delta).unwrap();
    let q = q_of(delta, p, lambda).unwrap();
    let reps = 20_000u64;
    let watched = [0u64, lattice.n() / 2, lattice.n() - 1];
    let mut hits = [0.0f64; 3];
    let mut pair = [0.0f64; 4];
    let root = RngStream::new(17, 0);
    for r in 0..reps {
        let b = sample_poisson(lattice.cover_rect(), lambda / p, root.replicate(r)).unwrap();
        let s = snap(&b.points, &lattice).unwrap();
        let occ: Vec<bool> = watched.iter().map(|w| s.sites.binary_search(w).is_ok()).collect();
        for (h, &o) in hits.iter_mut().zip(&occ) {
            *h += f64::from(u8::from(o));
        }
        pair[usize::from(occ[0]) * 2 + usize::from(occ[1])] += 1.0;
    }
    let r = reps as f64;
    for &h in &hits {
        let stat = chi_square(&[r - h, h], &[(1.0 - q) * r, q * r]);
        assert!(chi_square_sf(stat, 1.0) > 1e-4, "occupied {h} of {reps}, q = {q}");
    }
    let expected = [(1.0 - q) * (1.0 - q) * r, (1.0 - q) * q * r, q * (1.0 - q) * r, q * q * r];
    let stat = chi_square(&pair, &expected);
    assert!(chi_square_sf(stat, 3.0) > 1e-4, "pair table {pair:?}");
}

#[test]
fn crossing_hypergraph_is_an_up_set() {
    let lattice = Lattice::new(2.0, 0.5, 1.0).unwrap();
    let ch = export_crossing_hypergraph(&lattice).unwrap();
    let h = &ch.hypergraph;
    assert_eq!(h.n() as u64, lattice.n());
    assert!(!h.is_empty());
    assert!(ch.is_up_set());
    let full = (1u64 << h.n()) - 1;
    assert!(h.contains(full));
    assert!(!h.contains(0));
    let mut prev: Option<Vec<f64>> = None;
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let r = r_h_all(h, p).unwrap();
        // Non-decreasing in the set.
        for b in 0..=full {
            for v in 0..h.n() {
                assert!(r[(b | 1 << v) as usize] + 1e-12 >= r[b as usize]);
            }
        }
        // Non-decreasing in p.
        if let Some(prev) = &prev {
            assert!(r.iter().zip(prev).all(|(a, b)| a + 1e-12 >= *b));
        }
        prev = Some(r);
    }
}
