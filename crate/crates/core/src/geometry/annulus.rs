use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{dist_to_segment, Point, Rect};

use super::crossing::GRID_CELL;
use super::grid::SpatialGrid;
use super::lens::{disc_meets_rect, lens_meets_rect};
use super::union_find::UnionFind;
use super::{ADJACENCY, RADIUS, TOL};

/// Square annulus: points whose ℓ∞ distance from `center` lies in `[ℓ, 2ℓ]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    center: Point,
    inner: f64,
}

type Segment = (Point, Point);

impl Annulus {
    pub fn new(center: Point, inner: f64) -> Result<Self> {
        if !(inner.is_finite() && inner > 0.0) {
            return Err(Error::invalid(format!(
                "annulus half-width must be positive, got {inner}"
            )));
        }
        Ok(Annulus { center, inner })
    }

    pub fn center(&self) -> Point {
        self.center
    }
    pub fn inner(&self) -> f64 {
        self.inner
    }
    pub fn outer(&self) -> f64 {
        2.0 * self.inner
    }

    pub fn outer_square(&self) -> Rect {
        Rect::new(self.center, 2.0 * self.outer(), 2.0 * self.outer())
            .expect("positive half-width")
    }

    pub fn inner_square(&self) -> Rect {
        Rect::new(self.center, 2.0 * self.inner, 2.0 * self.inner).expect("positive half-width")
    }

    pub fn contains(&self, p: Point) -> bool {
        let d = (p.x - self.center.x).abs().max((p.y - self.center.y).abs());
        d >= self.inner && d <= self.outer()
    }

    /// Top and bottom strips span the full width; left and right strips the
    /// full height. Neighbouring strips overlap in a corner square.
    pub fn strips(&self) -> [Rect; 4] {
        let (cx, cy) = (self.center.x, self.center.y);
        let (l, o) = (self.inner, self.outer());
        let b = |x0, x1, y0, y1| Rect::from_bounds(x0, x1, y0, y1).expect("positive strip");
        [
            b(cx - o, cx + o, cy + l, cy + o),
            b(cx - o, cx + o, cy - o, cy - l),
            b(cx - o, cx - l, cy - o, cy + o),
            b(cx + l, cx + o, cy - o, cy + o),
        ]
    }

    /// Pieces of the inner square boundary lying in each strip.
    fn inner_faces(&self) -> [Vec<Segment>; 4] {
        let (cx, cy) = (self.center.x, self.center.y);
        let l = self.inner;
        let p = Point::new;
        [
            vec![(p(cx - l, cy + l), p(cx + l, cy + l))],
            vec![(p(cx - l, cy - l), p(cx + l, cy - l))],
            vec![(p(cx - l, cy - l), p(cx - l, cy + l))],
            vec![(p(cx + l, cy - l), p(cx + l, cy + l))],
        ]
    }

    /// Pieces of the outer square boundary lying in each strip.
    fn outer_faces(&self) -> [Vec<Segment>; 4] {
        let (cx, cy) = (self.center.x, self.center.y);
        let (l, o) = (self.inner, self.outer());
        let p = Point::new;
        [
            vec![
                (p(cx - o, cy + o), p(cx + o, cy + o)),
                (p(cx - o, cy + l), p(cx - o, cy + o)),
                (p(cx + o, cy + l), p(cx + o, cy + o)),
            ],
            vec![
                (p(cx - o, cy - o), p(cx + o, cy - o)),
                (p(cx - o, cy - o), p(cx - o, cy - l)),
                (p(cx + o, cy - o), p(cx + o, cy - l)),
            ],
            vec![
                (p(cx - o, cy - o), p(cx - o, cy + o)),
                (p(cx - o, cy + o), p(cx - l, cy + o)),
                (p(cx - o, cy - o), p(cx - l, cy - o)),
            ],
            vec![
                (p(cx + o, cy - o), p(cx + o, cy + o)),
                (p(cx + l, cy + o), p(cx + o, cy + o)),
                (p(cx + l, cy - o), p(cx + o, cy - o)),
            ],
        ]
    }
}

/// Whether the vacant space of the annulus separates its two faces, i.e. no
/// path inside `D(η) ∩ A` joins the inner boundary to the outer boundary.
///
/// A disc can meet the annulus in several pieces, so union-find nodes are
/// (disc, strip) pairs: `D(x) ∩ strip` is convex. Two pieces of one disc in
/// neighbouring strips are joined when the disc meets their shared corner
/// square; pieces of two discs in one strip are joined when the lens meets
/// that strip. Cross-strip links between different discs add nothing: a lens
/// meeting a corner square already links both discs inside either strip.
pub fn annulus_vacant_circuit(eta: &[Point], ann: &Annulus) -> bool {
    let strips = ann.strips();
    let inner = ann.inner_faces();
    let outer = ann.outer_faces();
    let centers: Vec<Point> = eta
        .iter()
        .copied()
        .filter(|&p| strips.iter().any(|s| disc_meets_rect(p, s, TOL)))
        .collect();
    let n = centers.len();
    let node = |i: usize, s: usize| 4 * i + s;
    let (inner_node, outer_node) = (4 * n, 4 * n + 1);
    let mut uf = UnionFind::new(4 * n + 2);
    let mut present = vec![[false; 4]; n];
    let touches = |p: Point, segs: &[Segment]| {
        segs.iter()
            .any(|&(a, b)| dist_to_segment(p, a, b) <= RADIUS + TOL)
    };
    const NEIGHBOURS: [(usize, usize); 4] = [(0, 2), (0, 3), (1, 2), (1, 3)];
    let corners: Vec<(usize, usize, Rect)> = NEIGHBOURS
        .iter()
        .map(|&(a, b)| (a, b, strips[a].intersection(&strips[b]).expect("corner square")))
        .collect();
    for (i, &p) in centers.iter().enumerate() {
        for s in 0..4 {
            if !disc_meets_rect(p, &strips[s], TOL) {
                continue;
            }
            present[i][s] = true;
            if touches(p, &inner[s]) {
                uf.union(node(i, s), inner_node);
            }
            if touches(p, &outer[s]) {
                uf.union(node(i, s), outer_node);
            }
        }
        for (a, b, corner) in &corners {
            if disc_meets_rect(p, corner, TOL) {
                uf.union(node(i, *a), node(i, *b));
            }
        }
    }
    let grid = SpatialGrid::new(&centers, GRID_CELL);
    for (i, j) in grid.pairs_within(&centers, ADJACENCY + TOL) {
        for s in 0..4 {
            if present[i][s]
                && present[j][s]
                && lens_meets_rect(centers[i], centers[j], &strips[s], TOL)
            {
                uf.union(node(i, s), node(j, s));
            }
        }
    }
    !uf.connected(inner_node, outer_node)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_annulus_has_a_circuit() {
        let a = Annulus::new(Point::default(), 4.0).unwrap();
        assert!(annulus_vacant_circuit(&[], &a));
    }

    #[test]
    fn radial_chain_blocks_the_circuit() {
        let a = Annulus::new(Point::new(1.0, -2.0), 4.0).unwrap();
        let eta: Vec<Point> = (0..6)
            .map(|k| Point::new(1.0 + 3.0 + 1.9 * k as f64 * 0.5, -2.0))
            .collect();
        assert!(!annulus_vacant_circuit(&eta, &a));
        let diag: Vec<Point> = (0..8)
            .map(|k| {
                let t = 3.0 + 0.9 * k as f64;
                Point::new(1.0 + t, -2.0 + t)
            })
            .collect();
        assert!(!annulus_vacant_circuit(&diag, &a));
    }

    #[test]
    fn ring_of_discs_is_not_a_crossing() {
        let a = Annulus::new(Point::default(), 6.0).unwrap();
        // A closed occupied ring in the middle of the annulus touches neither face.
        let mut eta = Vec::new();
        let r = 9.0;
        let mut t = -r;
        while t <= r {
            eta.push(Point::new(t, r));
            eta.push(Point::new(t, -r));
            eta.push(Point::new(r, t));
            eta.push(Point::new(-r, t));
            t += 1.5;
        }
        assert!(annulus_vacant_circuit(&eta, &a));
    }

    #[test]
    fn a_disc_split_by_the_hole_stays_split() {
        // A disc poking into the hole from below-left meets the annulus in
        // two pieces near the inner corner. With ℓ small the pieces join via
        // the corner square; the disc alone never spans inner to outer face.
        let a = Annulus::new(Point::default(), 3.0).unwrap();
        let eta = [Point::new(-2.5, -2.5)];
        assert!(annulus_vacant_circuit(&eta, &a));
    }
}
