use crate::sampling::{Point, Rect};

use super::RADIUS;

fn minimax(u: Point, v: Point, x: Point) -> f64 {
    x.dist2(u).max(x.dist2(v)).sqrt()
}

/// Minimum of `max(‖x−u‖, ‖x−v‖)` over `x` on the segment `[a, b]`.
///
/// The objective is convex along the segment, so a ternary search converges
/// to the minimum; it stops early once the value drops below `target`.
fn segment_minimax(u: Point, v: Point, a: Point, b: Point, target: f64) -> f64 {
    let at = |t: f64| Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
    let mut best = minimax(u, v, a).min(minimax(u, v, b));
    if best <= target {
        return best;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-12 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let (f1, f2) = (minimax(u, v, at(m1)), minimax(u, v, at(m2)));
        best = best.min(f1).min(f2);
        if best <= target {
            return best;
        }
        if f1 <= f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(minimax(u, v, at(0.5 * (lo + hi))))
}

/// Whether the lens `D(u) ∩ D(v)` meets the closed rectangle, with slack `tol`.
pub fn lens_meets_rect(u: Point, v: Point, rect: &Rect, tol: f64) -> bool {
    let target = RADIUS + tol;
    if u.dist(v) > 2.0 * target {
        return false;
    }
    let mid = u.midpoint(v);
    if rect.contains(mid) {
        return true;
    }
    if !disc_meets_rect(u, rect, tol) || !disc_meets_rect(v, rect, tol) {
        return false;
    }
    // The minimiser over the rectangle lies on its boundary once the
    // unconstrained minimiser is outside it.
    let c = rect.corners();
    (0..4).any(|k| segment_minimax(u, v, c[k], c[(k + 1) % 4], target) <= target)
}

/// Whether the unit disc at `u` meets the closed rectangle, with slack `tol`.
pub fn disc_meets_rect(u: Point, rect: &Rect, tol: f64) -> bool {
    rect.distance_to(u) <= RADIUS + tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TOL;
    use rand::{Rng, SeedableRng};

    fn square(x0: f64, x1: f64, y0: f64, y1: f64) -> Rect {
        Rect::from_bounds(x0, x1, y0, y1).unwrap()
    }

    #[test]
    fn documented_cases() {
        let r = Rect::square(4.0).unwrap();
        assert!(lens_meets_rect(Point::default(), Point::default(), &r, TOL));
        let big = square(-5.0, 5.0, -5.0, 5.0);
        assert!(lens_meets_rect(Point::new(0.0, 0.0), Point::new(2.0, 0.0), &big, TOL));
        let far = square(10.0, 11.0, 10.0, 11.0);
        assert!(!lens_meets_rect(Point::new(0.0, 0.0), Point::new(1.0, 0.0), &far, TOL));
    }

    #[test]
    fn lens_outside_but_discs_inside() {
        // Both discs reach x = 0 but their lens ends at x = -0.2.
        let r = square(0.0, 5.0, -5.0, 5.0);
        let u = Point::new(-1.0, 0.6);
        let v = Point::new(-1.0, -0.6);
        assert!(disc_meets_rect(u, &r, TOL) && disc_meets_rect(v, &r, TOL));
        assert!(!lens_meets_rect(u, v, &r, TOL));
        let r2 = square(-0.3, 5.0, -5.0, 5.0);
        assert!(lens_meets_rect(u, v, &r2, TOL));
    }

    #[test]
    fn agrees_with_dense_sampling_of_the_rectangle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let r = square(0.0, 3.0, 0.0, 2.0);
        let mut decided = 0;
        for _ in 0..400 {
            let u = Point::new(rng.random_range(-1.5..4.5), rng.random_range(-1.5..3.5));
            let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let d: f64 = rng.random_range(0.0..2.0);
            let v = Point::new(u.x + d * ang.cos(), u.y + d * ang.sin());
            // Brute minimax over a fine grid of the rectangle.
            let n = 600;
            let mut best = f64::INFINITY;
            for i in 0..=n {
                for j in 0..=n {
                    let x = Point::new(3.0 * i as f64 / n as f64, 2.0 * j as f64 / n as f64);
                    best = best.min(minimax(u, v, x));
                }
            }
            let fast = lens_meets_rect(u, v, &r, TOL);
            if best <= 1.0 {
                assert!(fast, "u={u:?} v={v:?} brute={best}");
                decided += 1;
            } else if best > 1.0 + 0.01 {
                assert!(!fast, "u={u:?} v={v:?} brute={best}");
                decided += 1;
            }
        }
        assert!(decided > 380);
    }
}
