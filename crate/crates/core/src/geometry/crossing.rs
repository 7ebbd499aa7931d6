use crate::sampling::{dist_to_segment, Point, Rect};

use super::grid::SpatialGrid;
use super::lens::{disc_meets_rect, lens_meets_rect};
use super::union_find::UnionFind;
use super::{Direction, ADJACENCY, RADIUS, TOL};

pub(crate) const GRID_CELL: f64 = ADJACENCY + 4.0 * TOL;

/// Unit discs restricted to a rectangle.
///
/// Only discs meeting the rectangle are kept. Two discs are joined when
/// their lens meets the rectangle: each `D(x) ∩ R` is convex, so two of them
/// are connected inside `R` exactly when they share a point of `R`.
#[derive(Clone, Debug)]
pub struct DiscGraph {
    centers: Vec<Point>,
    rect: Rect,
    grid: SpatialGrid,
}

impl DiscGraph {
    pub fn new(points: &[Point], rect: Rect) -> Self {
        let centers: Vec<Point> = points
            .iter()
            .copied()
            .filter(|&p| disc_meets_rect(p, &rect, TOL))
            .collect();
        let grid = SpatialGrid::new(&centers, GRID_CELL);
        DiscGraph {
            centers,
            rect,
            grid,
        }
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    /// Pairs of retained discs that are connected inside the rectangle.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.grid
            .pairs_within(&self.centers, ADJACENCY + TOL)
            .into_iter()
            .filter(|&(i, j)| lens_meets_rect(self.centers[i], self.centers[j], &self.rect, TOL))
            .collect()
    }

    fn touches(&self, p: Point, (a, b): (Point, Point)) -> bool {
        dist_to_segment(p, a, b) <= RADIUS + TOL
    }

    /// Union-find over discs plus two virtual nodes: `n` (left side) and `n + 1` (right side).
    pub fn components(&self) -> UnionFind {
        let n = self.centers.len();
        let mut uf = UnionFind::new(n + 2);
        let (left, right) = (self.rect.left_edge(), self.rect.right_edge());
        for (i, &p) in self.centers.iter().enumerate() {
            if self.touches(p, left) {
                uf.union(i, n);
            }
            if self.touches(p, right) {
                uf.union(i, n + 1);
            }
        }
        for (i, j) in self.edges() {
            uf.union(i, j);
        }
        uf
    }

    pub fn horizontal_crossing(&self) -> bool {
        let n = self.centers.len();
        self.components().connected(n, n + 1)
    }
}

/// Whether `D(η) ∩ R` contains a path from the left side of `rect` to the right side.
pub fn occupied_horizontal_crossing(eta: &[Point], rect: &Rect) -> bool {
    DiscGraph::new(eta, *rect).horizontal_crossing()
}

/// Whether `D(η) ∩ R` contains a path from the bottom side of `rect` to the top side.
pub fn occupied_vertical_crossing(eta: &[Point], rect: &Rect) -> bool {
    let swapped: Vec<Point> = eta.iter().map(|p| p.transposed()).collect();
    occupied_horizontal_crossing(&swapped, &rect.transposed())
}

pub fn occupied_crossing(eta: &[Point], rect: &Rect, direction: Direction) -> bool {
    match direction {
        Direction::Horizontal => occupied_horizontal_crossing(eta, rect),
        Direction::Vertical => occupied_vertical_crossing(eta, rect),
    }
}

/// Vacant crossings by planar duality: a vacant vertical crossing exists iff
/// there is no occupied horizontal one, and vice versa.
pub fn vacant_crossing(eta: &[Point], rect: &Rect, direction: Direction) -> bool {
    match direction {
        Direction::Vertical => !occupied_horizontal_crossing(eta, rect),
        Direction::Horizontal => !occupied_vertical_crossing(eta, rect),
    }
}

/// Smallest mark `t` such that the points with mark `≤ t` cross `rect`
/// horizontally, or `None` if even the full configuration does not.
///
/// Points are inserted in increasing mark order into one union-find, so the
/// whole monotone path `t ↦ H({x : mark(x) ≤ t})` costs a single pass.
pub fn crossing_threshold(points: &[Point], marks: &[f64], rect: &Rect) -> Option<f64> {
    assert_eq!(points.len(), marks.len(), "one mark per point");
    let mut order: Vec<usize> = (0..points.len())
        .filter(|&i| disc_meets_rect(points[i], rect, TOL))
        .collect();
    order.sort_by(|&a, &b| marks[a].total_cmp(&marks[b]).then(a.cmp(&b)));
    let centers: Vec<Point> = order.iter().map(|&i| points[i]).collect();
    let grid = SpatialGrid::new(&centers, GRID_CELL);
    let n = centers.len();
    let (left, right) = (rect.left_edge(), rect.right_edge());
    let mut uf = UnionFind::new(n + 2);
    let r2 = (ADJACENCY + TOL) * (ADJACENCY + TOL);
    for (k, &p) in centers.iter().enumerate() {
        if dist_to_segment(p, left.0, left.1) <= RADIUS + TOL {
            uf.union(k, n);
        }
        if dist_to_segment(p, right.0, right.1) <= RADIUS + TOL {
            uf.union(k, n + 1);
        }
        grid.for_each_candidate(p, |j| {
            if j < k && p.dist2(centers[j]) <= r2 && lens_meets_rect(p, centers[j], rect, TOL) {
                uf.union(k, j);
            }
        });
        if uf.connected(n, n + 1) {
            return Some(marks[order[k]]);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(rect: &Rect, spacing: f64) -> Vec<Point> {
        let mut x = rect.x_min() - 0.5;
        let mut out = Vec::new();
        while x <= rect.x_max() + 0.5 {
            out.push(Point::new(x, rect.center().y));
            x += spacing;
        }
        out
    }

    #[test]
    fn empty_never_crosses() {
        let r = Rect::square(10.0).unwrap();
        assert!(!occupied_horizontal_crossing(&[], &r));
        assert!(vacant_crossing(&[], &r, Direction::Vertical));
        assert!(vacant_crossing(&[], &r, Direction::Horizontal));
    }

    #[test]
    fn explicit_chain_crosses() {
        let r = Rect::square(10.0).unwrap();
        let eta = chain(&r, 1.9);
        assert!(occupied_horizontal_crossing(&eta, &r));
        assert!(!vacant_crossing(&eta, &r, Direction::Vertical));
        assert!(!occupied_vertical_crossing(&eta, &r));
        let broken = chain(&r, 2.1);
        assert!(!occupied_horizontal_crossing(&broken, &r));
    }

    #[test]
    fn exact_tangency_counts_as_adjacent() {
        let r = Rect::centered(4.0, 2.0).unwrap();
        let eta = [Point::new(-1.0, 0.0), Point::new(1.0, 0.0)];
        assert!(occupied_horizontal_crossing(&eta, &r));
    }

    #[test]
    fn connection_outside_the_rectangle_is_ignored() {
        // Two discs meet only below the rectangle.
        let r = Rect::from_bounds(-3.0, 3.0, 0.0, 4.0).unwrap();
        let eta = [
            Point::new(-2.6, -0.5),
            Point::new(-0.95, -0.9),
            Point::new(0.95, -0.9),
            Point::new(2.6, -0.5),
        ];
        assert!(!occupied_horizontal_crossing(&eta, &r));
        let r2 = Rect::from_bounds(-3.0, 3.0, -1.0, 4.0).unwrap();
        assert!(occupied_horizontal_crossing(&eta, &r2));
    }

    #[test]
    fn threshold_matches_repeated_detection() {
        let r = Rect::square(6.0).unwrap();
        let stream = crate::sampling::RngStream::new(31, 0);
        for i in 0..30 {
            let b = crate::sampling::sample_poisson(r.padded(1.0), 1.2, stream.replicate(i))
                .unwrap();
            let marks: Vec<f64> = (0..b.len()).map(|k| ((k * 7919) % 1000) as f64).collect();
            let t = crossing_threshold(&b.points, &marks, &r);
            let below = |t: f64| -> Vec<Point> {
                b.points
                    .iter()
                    .zip(&marks)
                    .filter(|(_, &m)| m <= t)
                    .map(|(&p, _)| p)
                    .collect()
            };
            match t {
                Some(t) => {
                    assert!(occupied_horizontal_crossing(&below(t), &r));
                    assert!(!occupied_horizontal_crossing(&below(t - 0.5), &r));
                }
                None => assert!(!occupied_horizontal_crossing(&b.points, &r)),
            }
        }
    }
}
