//! Coupling between the continuum model on `R_{a×b}` and site percolation
//! on the lattice `δℤ² ∩ R_{(a+2)×(b+2)}`.
//!
//! Each site owns the half-open `δ×δ` cell centred on it, so a point `x`
//! snaps to `δ·⌊x/δ + 1/2⌋` coordinatewise. The cells tile a cover rectangle
//! slightly larger than the padded one; sampling `B` on the cover makes
//! every site occupied independently with probability `q = 1 − e^{−λδ²/p}`.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_capacity, Error, Result};
use crate::geometry::{occupied_horizontal_crossing, SpatialGrid, ADJACENCY, RADIUS};
use crate::hypergraph::{Hypergraph, MAX_EXACT_N};
use crate::sampling::{bernoulli_mask, sample_poisson_with, Point, Rect, RngStream};

/// `q = 1 − exp(−λ_c δ² / p)`.
pub fn q_of(delta: f64, p: f64, lambda_c: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) || !(p > 0.0 && p <= 1.0) || !(lambda_c > 0.0 && lambda_c.is_finite()) {
        return Err(Error::invalid(format!(
            "need delta > 0, p in (0, 1], lambda_c > 0; got delta={delta} p={p} lambda_c={lambda_c}"
        )));
    }
    Ok(-(-lambda_c * delta * delta / p).exp_m1())
}

/// Sites of `δℤ²` inside `R_{(a+2)×(b+2)}`, indexed row-major from the
/// bottom-left site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    a: f64,
    b: f64,
    delta: f64,
    half_x: i64,
    half_y: i64,
}

/// Slack when deciding whether a boundary site lies in the closed rectangle.
const SITE_SLACK: f64 = 1e-9;

impl Lattice {
    pub fn new(a: f64, b: f64, delta: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && delta > 0.0) || !(a + b + delta).is_finite() {
            return Err(Error::invalid(format!("need a, b, delta > 0; got a={a} b={b} delta={delta}")));
        }
        let half = |side: f64| ((side + 2.0) / 2.0 / delta + SITE_SLACK).floor() as i64;
        Ok(Lattice {
            a,
            b,
            delta,
            half_x: half(a),
            half_y: half(b),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn width(&self) -> u64 {
        (2 * self.half_x + 1) as u64
    }

    /// Number of sites.
    pub fn n(&self) -> u64 {
        self.width() * (2 * self.half_y + 1) as u64
    }

    /// `R_{a×b}`, the rectangle whose crossings are studied.
    pub fn rect(&self) -> Rect {
        Rect::centered(self.a, self.b).expect("validated dimensions")
    }

    /// `R_{(a+2)×(b+2)}`.
    pub fn padded_rect(&self) -> Rect {
        self.rect().padded(RADIUS)
    }

    /// Union of all cells.
    pub fn cover_rect(&self) -> Rect {
        let hx = (self.half_x as f64 + 0.5) * self.delta;
        let hy = (self.half_y as f64 + 0.5) * self.delta;
        Rect::from_bounds(-hx, hx, -hy, hy).expect("positive extent")
    }

    pub fn site(&self, index: u64) -> Point {
        let w = self.width();
        let i = (index % w) as i64 - self.half_x;
        let j = (index / w) as i64 - self.half_y;
        Point::new(i as f64 * self.delta, j as f64 * self.delta)
    }

    pub fn sites(&self) -> Vec<Point> {
        (0..self.n()).map(|i| self.site(i)).collect()
    }

    /// `ψ`: index of the site whose cell contains `x`, or `None` outside the cover.
    pub fn snap_index(&self, x: Point) -> Option<u64> {
        let i = (x.x / self.delta + 0.5).floor() as i64;
        let j = (x.y / self.delta + 0.5).floor() as i64;
        if i.abs() > self.half_x || j.abs() > self.half_y {
            return None;
        }
        Some((j + self.half_y) as u64 * self.width() + (i + self.half_x) as u64)
    }
}

/// `B̂ = ψ(B)` together with the site of each point of `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapped {
    /// Occupied sites, sorted and without duplicates.
    pub sites: Vec<u64>,
    /// `ψ(x)` for each `x ∈ B`, in input order.
    pub preimage: Vec<u64>,
}

pub fn snap(points: &[Point], lattice: &Lattice) -> Result<Snapped> {
    let preimage = points
        .iter()
        .map(|&x| {
            lattice
                .snap_index(x)
                .ok_or_else(|| Error::invalid(format!("point ({}, {}) lies outside the lattice cover", x.x, x.y)))
        })
        .collect::<Result<Vec<u64>>>()?;
    let sites: BTreeSet<u64> = preimage.iter().copied().collect();
    Ok(Snapped {
        sites: sites.into_iter().collect(),
        preimage,
    })
}

/// Which clause of the bad event fired first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BadEvent {
    /// Two points of `B` share a cell.
    SharedCell,
    /// Some pair has `2 − 2δ ≤ ‖x − y‖ ≤ 2 + 2δ`.
    NearTangent,
    /// Some point has `1 − δ ≤ dist(x, ∂R_{a×b}) ≤ 1 + δ`.
    NearBoundary,
}

/// Checks the clauses in order and reports the first that holds.
pub fn bad_event(points: &[Point], lattice: &Lattice) -> Result<Option<BadEvent>> {
    let d = lattice.delta();
    let snapped = snap(points, lattice)?;
    if snapped.sites.len() < points.len() {
        return Ok(Some(BadEvent::SharedCell));
    }
    let outer = ADJACENCY + 2.0 * d;
    let inner2 = (ADJACENCY - 2.0 * d).max(0.0).powi(2);
    let grid = SpatialGrid::new(points, outer);
    if grid
        .pairs_within(points, outer)
        .iter()
        .any(|&(i, j)| points[i].dist2(points[j]) >= inner2)
    {
        return Ok(Some(BadEvent::NearTangent));
    }
    let rect = lattice.rect();
    if points.iter().any(|&x| {
        let r = rect.distance_to_boundary(x);
        (RADIUS - d..=RADIUS + d).contains(&r)
    }) {
        return Ok(Some(BadEvent::NearBoundary));
    }
    Ok(None)
}

/// The graph induced by a configuration: pairs at distance at most 2 and
/// the discs meeting `R_{a×b}`, both in terms of point indices.
fn induced_graph(points: &[Point], rect: &Rect) -> (BTreeSet<(usize, usize)>, Vec<bool>) {
    let grid = SpatialGrid::new(points, ADJACENCY);
    let edges = grid.pairs_within(points, ADJACENCY).into_iter().collect();
    let meets = points.iter().map(|&x| rect.distance_to(x) <= RADIUS).collect();
    (edges, meets)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CouplingReplicate {
    pub index: u64,
    pub b_points: usize,
    pub bad: Option<BadEvent>,
    pub continuum_crossing: bool,
    pub lattice_crossing: bool,
    /// Whether the induced graphs of `B` and `B̂` coincide under `ψ`.
    pub graphs_identical: bool,
}

impl CouplingReplicate {
    pub fn disagrees(&self) -> bool {
        self.continuum_crossing != self.lattice_crossing
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub replicates: usize,
    pub q: f64,
    pub disagreements: usize,
    pub bad_events: usize,
    pub shared_cell: usize,
    pub near_tangent: usize,
    pub near_boundary: usize,
    /// Disagreements on replicates without a bad event; the coupling says zero.
    pub unexplained_disagreements: usize,
    /// Replicates without a bad event whose induced graphs differ; also zero.
    pub graph_mismatches: usize,
    pub records: Vec<CouplingReplicate>,
}

impl CouplingReport {
    pub fn disagreement_rate(&self) -> f64 {
        self.disagreements as f64 / self.replicates as f64
    }
    pub fn bad_event_rate(&self) -> f64 {
        self.bad_events as f64 / self.replicates as f64
    }
}

/// One coupled replicate: `B ~ Poisson(λ_c/p)` on the cover, `η` a
/// `p`-subset of `B`, and `η̂` the sites whose first preimage point is in `η`.
pub fn coupled_replicate(lambda_c: f64, p: f64, lattice: &Lattice, stream: RngStream, index: u64) -> Result<CouplingReplicate> {
    let stream = stream.replicate(index);
    let mut rng = stream.child(0).rng();
    let b = sample_poisson_with(lattice.cover_rect(), lambda_c / p, &mut rng)?;
    let mut rng = stream.child(1).rng();
    let mask = bernoulli_mask(b.len(), p, &mut rng);
    let snapped = snap(&b, lattice)?;
    let bad = bad_event(&b, lattice)?;

    let rect = lattice.rect();
    let eta: Vec<Point> = b.iter().zip(&mask).filter(|(_, &m)| m).map(|(&x, _)| x).collect();
    let mut seen = BTreeSet::new();
    let eta_hat: Vec<Point> = snapped
        .preimage
        .iter()
        .zip(&mask)
        .filter(|(s, _)| seen.insert(**s))
        .filter(|(_, &m)| m)
        .map(|(&s, _)| lattice.site(s))
        .collect();

    let snapped_points: Vec<Point> = snapped.preimage.iter().map(|&s| lattice.site(s)).collect();
    let graphs_identical = induced_graph(&b, &rect) == induced_graph(&snapped_points, &rect);

    Ok(CouplingReplicate {
        index,
        b_points: b.len(),
        bad,
        continuum_crossing: occupied_horizontal_crossing(&eta, &rect),
        lattice_crossing: occupied_horizontal_crossing(&eta_hat, &rect),
        graphs_identical,
    })
}

/// Runs `replicates` coupled replicates (replicate `i` on stream `i`) and
/// tallies disagreements against bad events.
pub fn coupled_crossing_compare(
    lambda_c: f64,
    p: f64,
    lattice: &Lattice,
    replicates: usize,
    stream: RngStream,
) -> Result<CouplingReport> {
    let q = q_of(lattice.delta(), p, lambda_c)?;
    let records = (0..replicates as u64)
        .into_par_iter()
        .map(|i| coupled_replicate(lambda_c, p, lattice, stream, i))
        .collect::<Result<Vec<_>>>()?;
    let count = |f: &dyn Fn(&CouplingReplicate) -> bool| records.iter().filter(|r| f(r)).count();
    Ok(CouplingReport {
        replicates,
        q,
        disagreements: count(&|r| r.disagrees()),
        bad_events: count(&|r| r.bad.is_some()),
        shared_cell: count(&|r| r.bad == Some(BadEvent::SharedCell)),
        near_tangent: count(&|r| r.bad == Some(BadEvent::NearTangent)),
        near_boundary: count(&|r| r.bad == Some(BadEvent::NearBoundary)),
        unexplained_disagreements: count(&|r| r.disagrees() && r.bad.is_none()),
        graph_mismatches: count(&|r| !r.graphs_identical && r.bad.is_none()),
        records,
    })
}

/// The hypergraph of site sets whose discs cross `R_{a×b}` horizontally,
/// with vertex `i` standing for site `i` of the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingHypergraph {
    pub hypergraph: Hypergraph,
    pub sites: Vec<Point>,
}

impl CrossingHypergraph {
    /// Hypergraph text format preceded by `# site <i> <x> <y>` comment lines
    /// (1-based, matching the edge lists).
    pub fn write_text<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (i, s) in self.sites.iter().enumerate() {
            writeln!(out, "# site {} {:.16e} {:.16e}", i + 1, s.x, s.y)?;
        }
        self.hypergraph.write_text(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_text(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }

    /// Whether the edge set is closed under taking supersets.
    pub fn is_up_set(&self) -> bool {
        let h = &self.hypergraph;
        h.edges()
            .iter()
            .all(|&e| (0..h.n()).all(|v| h.contains(e | 1 << v)))
    }
}

/// Enumerates all `2^n` site subsets and keeps those that cross.
pub fn export_crossing_hypergraph(lattice: &Lattice) -> Result<CrossingHypergraph> {
    let n = lattice.n() as usize;
    check_capacity("crossing hypergraph sites", n, MAX_EXACT_N)?;
    let sites = lattice.sites();
    let rect = lattice.rect();
    let edges: Vec<u64> = (0..1u64 << n)
        .into_par_iter()
        .filter(|&mask| {
            let chosen: Vec<Point> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| sites[i]).collect();
            occupied_horizontal_crossing(&chosen, &rect)
        })
        .collect();
    Ok(CrossingHypergraph {
        hypergraph: Hypergraph::new(n, edges)?,
        sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_formula() {
        let q = q_of((2f64.ln()).sqrt(), 1.0, 1.0).unwrap();
        assert!((q - 0.5).abs() < 1e-15);
        assert!(q_of(1e-9, 0.5, 0.4).unwrap() < 1e-17);
    }

    #[test]
    fn pqn_tracks_area() {
        let l = Lattice::new(10.0, 10.0, 0.05).unwrap();
        let (p, lc) = (0.1, 0.36);
        let pqn = p * q_of(0.05, p, lc).unwrap() * l.n() as f64;
        let target = lc * 100.0;
        // The padded rectangle is 12×12, so pqn ≈ λ_c·144 rather than λ_c·100.
        let padded = lc * 144.0;
        assert!((pqn - padded).abs() / padded < 0.02, "pqn={pqn} target={target}");
    }

    #[test]
    fn lattice_indexing() {
        let l = Lattice::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!(l.n(), 5 * 3);
        assert_eq!(l.site(0), Point::new(-2.0, -1.0));
        for i in 0..l.n() {
            assert_eq!(l.snap_index(l.site(i)), Some(i));
        }
        assert_eq!(l.snap_index(Point::new(0.49, 0.0)), l.snap_index(Point::new(0.0, 0.0)));
        assert_eq!(l.snap_index(Point::new(0.5, 0.0)), l.snap_index(Point::new(1.0, 0.0)));
        assert_eq!(l.snap_index(Point::new(2.6, 0.0)), None);
    }

    #[test]
    fn bad_event_clauses() {
        let l = Lattice::new(10.0, 10.0, 0.01).unwrap();
        let shared = [Point::new(0.001, 0.0), Point::new(-0.001, 0.002)];
        assert_eq!(bad_event(&shared, &l).unwrap(), Some(BadEvent::SharedCell));
        let tangent = [Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
        assert_eq!(bad_event(&tangent, &l).unwrap(), Some(BadEvent::NearTangent));
        let boundary = [Point::new(4.0, 0.0)];
        assert_eq!(bad_event(&boundary, &l).unwrap(), Some(BadEvent::NearBoundary));
        assert_eq!(bad_event(&[], &l).unwrap(), None);
        assert_eq!(bad_event(&[Point::new(0.0, 0.0)], &l).unwrap(), None);
    }

    #[test]
    fn single_site_hypergraph() {
        // One site at the origin; a 1×1 rectangle is spanned by the unit disc.
        let l = Lattice::new(1.0, 1.0, 2.0).unwrap();
        assert_eq!(l.n(), 1);
        let h = export_crossing_hypergraph(&l).unwrap();
        assert_eq!(h.hypergraph.edges(), &[1]);
        assert!(h.is_up_set());
    }
}
