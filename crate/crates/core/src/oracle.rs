//! Slow, independent reference implementations used to cross-check the
//! fast engines.
//!
//! Raster oracles decide connectivity on a pixel grid. Running them with disc
//! radius `1 − h` and `1 + h` brackets the continuum answer: a path through
//! pixels of the shrunken discs is a genuine path, and a genuine path makes
//! every pixel it passes through occupied at radius `1 + h`.

use std::collections::VecDeque;

use crate::error::{check_capacity, Result};
use crate::fourier::{BooleanFn, MAX_PAIR_N};
use crate::geometry::{Annulus, ADJACENCY, TOL};
use crate::sampling::{dist_to_segment, Point, Rect};
use crate::water::StartSide;

/// Pixel grid of `nx × ny` square-ish cells covering `rect`.
struct Raster {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
    nx: usize,
    ny: usize,
    occupied: Vec<bool>,
}

impl Raster {
    fn new(rect: &Rect, resolution: f64) -> Self {
        let nx = ((rect.width() / resolution).round() as usize).max(1);
        let ny = ((rect.height() / resolution).round() as usize).max(1);
        Raster {
            x0: rect.x_min(),
            y0: rect.y_min(),
            sx: rect.width() / nx as f64,
            sy: rect.height() / ny as f64,
            nx,
            ny,
            occupied: vec![false; nx * ny],
        }
    }

    /// Marks every pixel whose centre lies within `radius` of a disc centre.
    fn fill(&mut self, centers: &[Point], radius: f64) {
        for c in centers {
            let j_lo = ((c.y - radius - self.y0) / self.sy - 0.5).ceil().max(0.0) as usize;
            let j_hi = ((c.y + radius - self.y0) / self.sy - 0.5).floor();
            if j_hi < 0.0 {
                continue;
            }
            let j_hi = (j_hi as usize).min(self.ny - 1);
            for j in j_lo..=j_hi {
                let y = self.y0 + (j as f64 + 0.5) * self.sy;
                let dy = y - c.y;
                let w2 = radius * radius - dy * dy;
                if w2 < 0.0 {
                    continue;
                }
                let w = w2.sqrt();
                let i_lo = ((c.x - w - self.x0) / self.sx - 0.5).ceil().max(0.0) as usize;
                let i_hi = ((c.x + w - self.x0) / self.sx - 0.5).floor();
                if i_hi < 0.0 {
                    continue;
                }
                let i_hi = (i_hi as usize).min(self.nx - 1);
                for i in i_lo..=i_hi {
                    self.occupied[j * self.nx + i] = true;
                }
            }
        }
    }

    /// 4-connected flood fill through occupied pixels allowed by `allowed`,
    /// from pixels satisfying `source` until one satisfying `target` is hit.
    fn connects(
        &self,
        allowed: impl Fn(usize, usize) -> bool,
        source: impl Fn(usize, usize) -> bool,
        target: impl Fn(usize, usize) -> bool,
    ) -> bool {
        let open = |i: usize, j: usize| self.occupied[j * self.nx + i] && allowed(i, j);
        let mut seen = vec![false; self.nx * self.ny];
        let mut queue = VecDeque::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                if source(i, j) && open(i, j) {
                    seen[j * self.nx + i] = true;
                    queue.push_back((i, j));
                }
            }
        }
        while let Some((i, j)) = queue.pop_front() {
            if target(i, j) {
                return true;
            }
            let mut visit = |a: usize, b: usize| {
                if open(a, b) && !seen[b * self.nx + a] {
                    seen[b * self.nx + a] = true;
                    queue.push_back((a, b));
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < self.nx {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < self.ny {
                visit(i, j + 1);
            }
        }
        false
    }
}

/// Raster answer at radius 1 plus the bracketing answers at `1 ∓ h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RasterVerdict {
    pub raster: bool,
    /// At radius `1 − h`; `true` here implies the continuum event.
    pub lower: bool,
    /// At radius `1 + h`; `false` here rules the continuum event out.
    pub upper: bool,
}

impl RasterVerdict {
    /// Whether `answer` is compatible with the bracket.
    pub fn admits(&self, answer: bool) -> bool {
        (!self.lower || answer) && (!answer || self.upper)
    }

    /// The bracket pins the answer down.
    pub fn resolved(&self) -> bool {
        self.lower == self.upper
    }
}

fn crossing_at(eta: &[Point], rect: &Rect, resolution: f64, radius: f64) -> bool {
    let mut r = Raster::new(rect, resolution);
    r.fill(eta, radius);
    let last = r.nx - 1;
    r.connects(|_, _| true, |i, _| i == 0, |i, _| i == last)
}

/// Horizontal occupied crossing of `rect` decided on a pixel grid.
pub fn raster_crossing(eta: &[Point], rect: &Rect, resolution: f64) -> RasterVerdict {
    RasterVerdict {
        raster: crossing_at(eta, rect, resolution, 1.0),
        lower: crossing_at(eta, rect, resolution, 1.0 - resolution),
        upper: crossing_at(eta, rect, resolution, 1.0 + resolution),
    }
}

/// Radius-1 raster only; cheaper when the bracket is not needed.
pub fn raster_crossing_value(eta: &[Point], rect: &Rect, resolution: f64) -> bool {
    crossing_at(eta, rect, resolution, 1.0)
}

fn annulus_connection_at(eta: &[Point], ann: &Annulus, resolution: f64, radius: f64) -> bool {
    let outer = ann.outer_square();
    // A multiple of 4 pixels per side aligns the inner square with pixel edges.
    let m = (((outer.width() / resolution) / 4.0).round() as usize).max(1) * 4;
    let mut r = Raster::new(&outer, outer.width() / m as f64);
    debug_assert_eq!(r.nx, m);
    r.fill(eta, radius);
    let (lo, hi) = (m / 4, 3 * m / 4);
    let inside = |i: usize, j: usize| (lo..hi).contains(&i) && (lo..hi).contains(&j);
    let ring = |i: usize, j: usize| {
        !inside(i, j)
            && (inside(i.wrapping_sub(1), j) || inside(i + 1, j) || inside(i, j.wrapping_sub(1)) || inside(i, j + 1))
    };
    r.connects(
        |i, j| !inside(i, j),
        ring,
        |i, j| i == 0 || j == 0 || i == m - 1 || j == m - 1,
    )
}

/// Occupied connection from the inner to the outer boundary of the annulus,
/// i.e. the negation of a vacant circuit.
pub fn raster_annulus_connection(eta: &[Point], ann: &Annulus, resolution: f64) -> RasterVerdict {
    RasterVerdict {
        raster: annulus_connection_at(eta, ann, resolution, 1.0),
        lower: annulus_connection_at(eta, ann, resolution, 1.0 - resolution),
        upper: annulus_connection_at(eta, ann, resolution, 1.0 + resolution),
    }
}

pub fn raster_annulus_connection_value(eta: &[Point], ann: &Annulus, resolution: f64) -> bool {
    annulus_connection_at(eta, ann, resolution, 1.0)
}

/// Result of the round-by-round water algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiteralWaterRun {
    /// Union of all queried sets, sorted.
    pub queried: Vec<usize>,
    /// `A_∞`, sorted.
    pub active: Vec<usize>,
}

/// The water algorithm exactly as its rounds are stated: `Q_k` is every
/// point of `B` within distance 2 of `A_{k−1}` (of the start segment for
/// `k = 1`), `A_k = Q_k ∩ η`, stopping when `A_k = A_{k−1}`. Quadratic per
/// round, with no spatial index.
pub fn literal_water(parent: &[Point], eta: &[bool], n: f64, side: StartSide) -> LiteralWaterRun {
    let x0 = match side {
        StartSide::Left => -0.5 * n,
        StartSide::Right => 0.5 * n,
    };
    let half = 0.5 * (n + 2.0);
    let (a, b) = (Point::new(x0, -half), Point::new(x0, half));
    let reach = ADJACENCY + TOL;
    let mut queried = vec![false; parent.len()];
    let mut q: Vec<usize> = (0..parent.len())
        .filter(|&i| dist_to_segment(parent[i], a, b) <= reach)
        .collect();
    let mut prev: Option<Vec<usize>> = None;
    loop {
        for &i in &q {
            queried[i] = true;
        }
        let active: Vec<usize> = q.iter().copied().filter(|&i| eta[i]).collect();
        if prev.as_ref() == Some(&active) || (prev.is_none() && active.is_empty()) {
            return LiteralWaterRun {
                queried: (0..parent.len()).filter(|&i| queried[i]).collect(),
                active,
            };
        }
        q = (0..parent.len())
            .filter(|&j| active.iter().any(|&i| parent[i].dist(parent[j]) <= reach))
            .collect();
        prev = Some(active);
    }
}

/// `h_f(x) = Σ_y P(Y = y)·f(Z(x, y))` by summing over every `y`.
pub fn literal_h_transform(f: &BooleanFn) -> Result<Vec<f64>> {
    let n = f.n();
    check_capacity("literal h transform size", n, MAX_PAIR_N)?;
    let p = f.p();
    let low = p <= 0.5;
    let density = if low { 2.0 * p } else { 2.0 * (1.0 - p) };
    let size = 1u32 << n;
    let weight = |y: u32| {
        let k = y.count_ones() as i32;
        density.powi(k) * (1.0 - density).powi(n as i32 - k)
    };
    Ok((0..size)
        .map(|x| {
            (0..size)
                .map(|y| {
                    let z = if low { x & y } else { !(!x & y) & (size - 1) };
                    weight(y) * f.value(z)
                })
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_single_disc() {
        let rect = Rect::centered(1.5, 1.0).unwrap();
        let v = raster_crossing(&[Point::new(0.0, 0.0)], &rect, 0.01);
        assert!(v.raster && v.lower && v.upper);
        let wide = Rect::centered(3.0, 1.0).unwrap();
        let v = raster_crossing(&[Point::new(0.0, 0.0)], &wide, 0.01);
        assert!(!v.raster && !v.lower && !v.upper);
    }

    #[test]
    fn raster_annulus_radial_chain() {
        let ann = Annulus::new(Point::new(0.0, 0.0), 3.0).unwrap();
        let chain: Vec<Point> = (0..4).map(|i| Point::new(2.5 + 1.5 * i as f64, 0.0)).collect();
        assert!(raster_annulus_connection(&chain, &ann, 0.02).raster);
        assert!(!raster_annulus_connection(&[], &ann, 0.02).upper);
        // A single disc in the middle of a strip touches neither face.
        assert!(!raster_annulus_connection(&[Point::new(4.5, 0.0)], &ann, 0.02).upper);
    }

    #[test]
    fn literal_water_follows_chain() {
        let n = 10.0;
        let chain: Vec<Point> = (0..7).map(|i| Point::new(-5.0 + 1.9 * i as f64, 0.0)).collect();
        let eta = vec![true; chain.len()];
        let run = literal_water(&chain, &eta, n, StartSide::Left);
        assert_eq!(run.active.len(), chain.len());
        let none = literal_water(&chain, &vec![false; chain.len()], n, StartSide::Left);
        assert!(none.active.is_empty());
        assert_eq!(none.queried, vec![0, 1]);
    }
}
