use crate::sampling::Point;

/// Uniform bucket grid over a point list.
///
/// Any two points at distance at most `cell` sit in the same or adjacent
/// cells, so a 3×3 block lookup yields a superset of the true neighbours.
#[derive(Clone, Debug)]
pub struct SpatialGrid {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl SpatialGrid {
    pub fn new(points: &[Point], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell must be positive");
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        if points.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let nx = ((x1 - x0) / cell).floor() as usize + 1;
        let ny = ((y1 - y0) / cell).floor() as usize + 1;
        let mut grid = SpatialGrid {
            x0,
            y0,
            cell,
            nx,
            ny,
            starts: vec![0; nx * ny + 1],
            items: vec![0; points.len()],
        };
        let cells: Vec<usize> = points.iter().map(|&p| grid.cell_index(p)).collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for c in 0..nx * ny {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    fn coords(&self, p: Point) -> (usize, usize) {
        let ix = ((p.x - self.x0) / self.cell).floor().max(0.0) as usize;
        let iy = ((p.y - self.y0) / self.cell).floor().max(0.0) as usize;
        (ix.min(self.nx - 1), iy.min(self.ny - 1))
    }

    fn cell_index(&self, p: Point) -> usize {
        let (ix, iy) = self.coords(p);
        iy * self.nx + ix
    }

    /// Calls `f` on every stored index in the 3×3 block of cells around `p`.
    pub fn for_each_candidate(&self, p: Point, mut f: impl FnMut(usize)) {
        let (ix, iy) = self.coords(p);
        for cy in iy.saturating_sub(1)..=(iy + 1).min(self.ny - 1) {
            for cx in ix.saturating_sub(1)..=(ix + 1).min(self.nx - 1) {
                let c = cy * self.nx + cx;
                for &j in &self.items[self.starts[c] as usize..self.starts[c + 1] as usize] {
                    f(j as usize);
                }
            }
        }
    }

    /// All pairs `i < j` with `‖p_i − p_j‖ ≤ radius`; `radius` must not exceed the cell size.
    pub fn pairs_within(&self, points: &[Point], radius: f64) -> Vec<(usize, usize)> {
        assert!(radius <= self.cell, "pair radius exceeds grid cell");
        let r2 = radius * radius;
        let mut out = Vec::new();
        for (i, &p) in points.iter().enumerate() {
            self.for_each_candidate(p, |j| {
                if j > i && p.dist2(points[j]) <= r2 {
                    out.push((i, j));
                }
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn never_misses_a_close_pair() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let pts: Vec<Point> = (0..120)
                .map(|_| Point::new(rng.random_range(-8.0..8.0), rng.random_range(-5.0..5.0)))
                .collect();
            let grid = SpatialGrid::new(&pts, 2.0);
            let mut fast = grid.pairs_within(&pts, 2.0);
            fast.sort_unstable();
            let mut brute = Vec::new();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    if pts[i].dist(pts[j]) <= 2.0 {
                        brute.push((i, j));
                    }
                }
            }
            assert_eq!(fast, brute);
        }
    }

    #[test]
    fn empty_grid_is_usable() {
        let grid = SpatialGrid::new(&[], 2.0);
        assert!(grid.pairs_within(&[], 2.0).is_empty());
    }
}
