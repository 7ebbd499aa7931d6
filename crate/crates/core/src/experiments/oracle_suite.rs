//! Exact and exhaustive cross-checks between independent routes, one row
//! per check.

use rand::Rng;
use serde::Serialize;

use crate::discretize::{coupled_crossing_compare, Lattice};
use crate::error::Result;
use crate::fourier::{h_transform, noise_correlation_exact, random_function, random_monotone, spectrum, BooleanFn};
use crate::geometry::{annulus_vacant_circuit, occupied_horizontal_crossing, Annulus};
use crate::hypergraph::{
    bey_check, chernoff_check, k_subsets, r_h, r_h_all, second_moment_identity, Hypergraph, RhMode,
};
use crate::oracle::{literal_h_transform, literal_water, raster_annulus_connection, raster_crossing};
use crate::sampling::{sample_poisson_with, Point, PointSet, Rect, RngStream};
use crate::water::{run_water_algorithm, StartSide};

const EXACT_TOL: f64 = 1e-10;
const DENSITIES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub module: &'static str,
    pub cases: usize,
    pub failures: usize,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }
}

struct Tally {
    cases: usize,
    failures: usize,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: 0 }
    }
    fn record(&mut self, ok: bool) {
        self.cases += 1;
        self.failures += usize::from(!ok);
    }
    fn finish(self, name: &'static str, module: &'static str) -> OracleCheck {
        OracleCheck {
            name,
            module,
            cases: self.cases,
            failures: self.failures,
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXACT_TOL
}

fn random_fns(stream: RngStream, count: usize, max_n: usize) -> Result<Vec<BooleanFn>> {
    let mut rng = stream.rng();
    (0..count)
        .map(|i| {
            let n = 1 + i % max_n;
            let p = DENSITIES[i % DENSITIES.len()];
            if i % 2 == 0 {
                random_function(n, p, &mut rng)
            } else {
                random_monotone(n, p, &mut rng)
            }
        })
        .collect()
}

fn fourier_checks(stream: RngStream) -> Result<Vec<OracleCheck>> {
    let fns = random_fns(stream, 40, 7)?;
    let mut parseval = Tally::new();
    let mut recon = Tally::new();
    let mut noise = Tally::new();
    let mut literal = Tally::new();
    for f in &fns {
        let s = spectrum(f);
        parseval.record(close(s.total_mass(), f.expect(|_, v| v * v)));
        let back = s.to_table();
        recon.record(
            f.table()
                .iter()
                .enumerate()
                .all(|(w, &v)| close(back[w], v) && close(s.reconstruct(w as u32), v)),
        );
        for eps in [0.1, 0.5, 0.9] {
            let c = noise_correlation_exact(f, eps)?;
            noise.record(close(c.spectral, c.direct));
        }
        let fast = h_transform(f);
        let slow = literal_h_transform(f)?;
        literal.record(fast.table().iter().zip(&slow).all(|(a, b)| close(*a, *b)));
    }
    Ok(vec![
        parseval.finish("parseval", "fourier"),
        recon.finish("reconstruction", "fourier"),
        noise.finish("noise_correlation_two_routes", "fourier"),
        literal.finish("h_transform_literal", "fourier"),
    ])
}

fn random_uniform(n: usize, m: usize, rng: &mut impl Rng) -> Result<Hypergraph> {
    let edges = k_subsets(n, m).filter(|_| rng.random::<bool>()).collect();
    Hypergraph::new(n, edges)
}

fn hypergraph_checks(stream: RngStream) -> Result<Vec<OracleCheck>> {
    let mut rng = stream.rng();
    let mut bey = Tally::new();
    let mut second = Tally::new();
    let mut rh = Tally::new();
    for i in 0..60 {
        let n = 3 + i % 7;
        let m = 1 + i % (n - 1);
        let h = random_uniform(n, m, &mut rng)?;
        for t in 1..=m {
            let r = bey_check(&h, m, t)?;
            if r.hypotheses_hold {
                bey.record(r.holds);
            }
        }
        for k in m..=n {
            second.record(second_moment_identity(&h, k, m)?.equal());
        }
        let p = DENSITIES[i % DENSITIES.len()];
        let all = r_h_all(&h, p)?;
        let full = (1u64 << n) - 1;
        for b in (0..=full).step_by(1 + (full as usize) / 64) {
            let e = r_h(b, p, &h, RhMode::Exact)?;
            rh.record(close(e.value, all[b as usize]));
        }
    }
    let mut chern = Tally::new();
    for n in [5u64, 20, 80] {
        for p in [0.05, 0.3, 0.5] {
            for a in [0.5, 2.0, 0.25 * n as f64] {
                chern.record(!chernoff_check(n, p, a)?.violated());
            }
        }
    }
    Ok(vec![
        bey.finish("bey_inequality", "hypergraph"),
        second.finish("second_moment_identity", "hypergraph"),
        rh.finish("r_h_two_routes", "hypergraph"),
        chern.finish("chernoff_bound", "hypergraph"),
    ])
}

fn geometry_checks(stream: RngStream) -> Result<Vec<OracleCheck>> {
    let rect = Rect::square(6.0)?;
    let region = rect.padded(1.0);
    let mut cross = Tally::new();
    for i in 0..20 {
        let pts = sample_poisson_with(region, 0.9, &mut stream.child(0).replicate(i).rng())?;
        cross.record(raster_crossing(&pts, &rect, 0.02).admits(occupied_horizontal_crossing(&pts, &rect)));
    }
    let ann = Annulus::new(Point::new(0.0, 0.0), 2.0)?;
    let outer = ann.outer_square().padded(1.0);
    let mut circuit = Tally::new();
    for i in 0..20 {
        let pts = sample_poisson_with(outer, 0.9, &mut stream.child(1).replicate(i).rng())?;
        circuit.record(raster_annulus_connection(&pts, &ann, 0.02).admits(!annulus_vacant_circuit(&pts, &ann)));
    }
    Ok(vec![
        cross.finish("crossing_vs_raster", "geometry"),
        circuit.finish("annulus_vs_raster", "geometry"),
    ])
}

fn water_checks(stream: RngStream) -> Result<Vec<OracleCheck>> {
    let n = 4.0;
    let region = Rect::square(n + 2.0)?;
    let mut determinacy = Tally::new();
    let mut literal = Tally::new();
    let mut found = 0;
    for i in 0.. {
        if found == 6 {
            break;
        }
        let pts = sample_poisson_with(region, 0.3, &mut stream.replicate(i).rng())?;
        if !(6..=10).contains(&pts.len()) {
            continue;
        }
        found += 1;
        let b = PointSet::new(pts, region);
        let rect = Rect::square(n)?;
        for mask in 0u32..(1 << b.len()) {
            let eta: Vec<bool> = (0..b.len()).map(|j| mask >> j & 1 == 1).collect();
            let trace = run_water_algorithm(&b, &eta, n, StartSide::Left)?;
            determinacy.record(trace.output == occupied_horizontal_crossing(&b.select(&eta), &rect));
            let lit = literal_water(&b.points, &eta, n, StartSide::Left);
            let mut queried = trace.queried.clone();
            queried.sort_unstable();
            let mut active = trace.active_final.clone();
            active.sort_unstable();
            literal.record(queried == lit.queried && active == lit.active);
        }
    }
    Ok(vec![
        determinacy.finish("water_output_is_crossing", "water_alg"),
        literal.finish("water_vs_literal_rounds", "water_alg"),
    ])
}

fn discretize_checks(stream: RngStream) -> Result<Vec<OracleCheck>> {
    let lattice = Lattice::new(4.0, 4.0, 0.01)?;
    let report = coupled_crossing_compare(1.0, 0.5, &lattice, 60, stream)?;
    let mut t = Tally::new();
    for r in &report.records {
        t.record(r.bad.is_some() || (!r.disagrees() && r.graphs_identical));
    }
    Ok(vec![t.finish("disagreement_implies_bad_event", "discretize")])
}

/// Runs every check; the outcome depends only on `seed`.
pub fn oracle_suite(seed: u64) -> Result<Vec<OracleCheck>> {
    let root = RngStream::new(seed, 0);
    let mut out = fourier_checks(root.child(1))?;
    out.extend(hypergraph_checks(root.child(2))?);
    out.extend(geometry_checks(root.child(3))?);
    out.extend(water_checks(root.child(4))?);
    out.extend(discretize_checks(root.child(5))?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let checks = oracle_suite(0).unwrap();
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
