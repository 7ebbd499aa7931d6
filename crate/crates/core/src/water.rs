//! The frontier-growing query algorithm that decides horizontal crossings
//! of `R_N`, and Monte Carlo estimates of its revealment.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::geometry::{
    annulus_vacant_circuit, occupied_horizontal_crossing, Annulus, SpatialGrid, ADJACENCY, TOL,
};
use crate::sampling::{bernoulli_mask, dist_to_segment, Point, PointSet, Rect, RngStream};

/// Which side the water is poured in from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StartSide {
    /// Start line `x = −N/2`.
    Left,
    /// Start line `x = +N/2`.
    Right,
}

/// Points of `B` newly queried, and newly activated, in one round.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub queried: Vec<usize>,
    pub activated: Vec<usize>,
}

/// Indices refer to positions in `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmTrace {
    /// Every queried point, in query order.
    pub queried: Vec<usize>,
    pub rounds: usize,
    pub active_final: Vec<usize>,
    pub output: bool,
    pub history: Vec<Round>,
}

impl AlgorithmTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serialises")
    }
}

/// Precomputed neighbourhood structure for one `B`, reusable across many `η ⊂ B`.
#[derive(Clone, Debug)]
pub struct WaterAlgorithm<'a> {
    parent: &'a [Point],
    grid: SpatialGrid,
    start: Vec<usize>,
    n: f64,
}

impl<'a> WaterAlgorithm<'a> {
    pub fn new(parent: &'a [Point], n: f64, side: StartSide) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid(format!("N must be positive, got {n}")));
        }
        let x0 = match side {
            StartSide::Left => -0.5 * n,
            StartSide::Right => 0.5 * n,
        };
        // The start line only matters inside R_{N+2}.
        let half = 0.5 * (n + 2.0);
        let (a, b) = (Point::new(x0, -half), Point::new(x0, half));
        let start = (0..parent.len())
            .filter(|&i| dist_to_segment(parent[i], a, b) <= ADJACENCY + TOL)
            .collect();
        Ok(WaterAlgorithm {
            parent,
            grid: SpatialGrid::new(parent, ADJACENCY + 4.0 * TOL),
            start,
            n,
        })
    }

    /// Runs the rounds; `on_round` sees each round's new queries and activations.
    fn rounds(&self, eta: &[bool], queried: &mut [bool], mut on_round: impl FnMut(&[usize], &[usize])) -> (usize, Vec<usize>) {
        assert_eq!(eta.len(), self.parent.len(), "eta mask must cover B");
        let r2 = (ADJACENCY + TOL) * (ADJACENCY + TOL);
        let mut active = Vec::new();
        let mut new_queries: Vec<usize> = self.start.clone();
        for &i in &new_queries {
            queried[i] = true;
        }
        let mut rounds = 0;
        loop {
            rounds += 1;
            let frontier: Vec<usize> = new_queries.iter().copied().filter(|&i| eta[i]).collect();
            on_round(&new_queries, &frontier);
            if frontier.is_empty() {
                return (rounds, active);
            }
            active.extend_from_slice(&frontier);
            new_queries.clear();
            for &a in &frontier {
                let pa = self.parent[a];
                self.grid.for_each_candidate(pa, |j| {
                    if !queried[j] && pa.dist2(self.parent[j]) <= r2 {
                        queried[j] = true;
                        new_queries.push(j);
                    }
                });
            }
            new_queries.sort_unstable();
        }
    }

    /// Full run with trace and output bit.
    pub fn run(&self, eta: &[bool]) -> AlgorithmTrace {
        let mut queried_mask = vec![false; self.parent.len()];
        let mut history = Vec::new();
        let (rounds, mut active) = self.rounds(eta, &mut queried_mask, |q, a| {
            history.push(Round {
                queried: q.to_vec(),
                activated: a.to_vec(),
            })
        });
        let queried = history.iter().flat_map(|r| r.queried.iter().copied()).collect();
        let rect = Rect::square(self.n).expect("positive N");
        let wet: Vec<Point> = active.iter().map(|&i| self.parent[i]).collect();
        let output = occupied_horizontal_crossing(&wet, &rect);
        active.sort_unstable();
        AlgorithmTrace {
            queried,
            rounds,
            active_final: active,
            output,
            history,
        }
    }

    /// Marks the queried points in `queried` (cleared first); skips the output computation.
    pub fn queried_mask(&self, eta: &[bool], queried: &mut Vec<bool>) {
        queried.clear();
        queried.resize(self.parent.len(), false);
        self.rounds(eta, queried, |_, _| {});
    }
}

/// Runs the algorithm once on `B` and the mask `eta ⊂ B`.
pub fn run_water_algorithm(parent: &PointSet, eta: &[bool], n: f64, side: StartSide) -> Result<AlgorithmTrace> {
    if eta.len() != parent.len() {
        return Err(Error::invalid(format!(
            "eta mask has {} entries for {} points",
            eta.len(),
            parent.len()
        )));
    }
    Ok(WaterAlgorithm::new(&parent.points, n, side)?.run(eta))
}

/// Which part of `R_{N+2}` revealment is measured over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RevealmentRegion {
    /// `x < 0`, measured for the algorithm started from the right.
    Left,
    /// `x ≥ 0`, measured for the algorithm started from the left.
    Right,
    /// Both halves, each with its own algorithm.
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RevealmentEstimate {
    /// Indices into `B` of the points in the region.
    pub indices: Vec<usize>,
    /// Fraction of replicates in which each of those points was queried.
    pub estimates: Vec<f64>,
    pub max: f64,
    pub argmax: Option<usize>,
    pub replicates: usize,
}

/// Replicate `r` draws `η` as a fresh `p`-subset from stream `(seed', r)`.
pub fn revealment_estimate(
    parent: &PointSet,
    p: f64,
    n: f64,
    region: RevealmentRegion,
    replicates: usize,
    stream: RngStream,
) -> Result<RevealmentEstimate> {
    check_probability("p", p)?;
    if replicates == 0 {
        return Err(Error::invalid("replicates must be at least 1"));
    }
    let pts = &parent.points;
    let box_ = Rect::square(n + 2.0)?;
    let in_box = |i: usize| box_.contains(pts[i]);
    let left_idx: Vec<usize> = (0..pts.len()).filter(|&i| in_box(i) && pts[i].x < 0.0).collect();
    let right_idx: Vec<usize> = (0..pts.len()).filter(|&i| in_box(i) && pts[i].x >= 0.0).collect();
    let (use_left, use_right) = match region {
        RevealmentRegion::Left => (true, false),
        RevealmentRegion::Right => (false, true),
        RevealmentRegion::All => (true, true),
    };
    let from_left = WaterAlgorithm::new(pts, n, StartSide::Left)?;
    let from_right = WaterAlgorithm::new(pts, n, StartSide::Right)?;
    let m = pts.len();
    let zero = || (vec![0u32; m], Vec::new());
    let (counts, _) = (0..replicates as u64)
        .into_par_iter()
        .fold(zero, |(mut counts, mut scratch), r| {
            let eta = bernoulli_mask(m, p, &mut stream.replicate(r).rng());
            if use_right {
                from_left.queried_mask(&eta, &mut scratch);
                for &i in &right_idx {
                    counts[i] += u32::from(scratch[i]);
                }
            }
            if use_left {
                from_right.queried_mask(&eta, &mut scratch);
                for &i in &left_idx {
                    counts[i] += u32::from(scratch[i]);
                }
            }
            (counts, scratch)
        })
        .reduce(zero, |(mut a, s), (b, _)| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            (a, s)
        });
    let mut indices: Vec<usize> = Vec::new();
    if use_left {
        indices.extend(&left_idx);
    }
    if use_right {
        indices.extend(&right_idx);
    }
    indices.sort_unstable();
    let estimates: Vec<f64> = indices
        .iter()
        .map(|&i| f64::from(counts[i]) / replicates as f64)
        .collect();
    let (argmax, max) = estimates
        .iter()
        .enumerate()
        .fold((None, 0.0), |(bi, bm), (k, &e)| if e > bm || bi.is_none() { (Some(indices[k]), e) } else { (bi, bm) });
    Ok(RevealmentEstimate {
        indices,
        estimates,
        max,
        argmax,
        replicates,
    })
}

/// Fraction of replicates with an occupied connection between the two faces
/// of the annulus `A_ℓ` around `square_center`, for `η` a fresh `p`-subset of `B`.
pub fn one_arm_probability(
    parent: &PointSet,
    p: f64,
    square_center: Point,
    ell: f64,
    replicates: usize,
    stream: RngStream,
) -> Result<f64> {
    check_probability("p", p)?;
    if replicates == 0 {
        return Err(Error::invalid("replicates must be at least 1"));
    }
    let ann = Annulus::new(square_center, ell)?;
    let hits: usize = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let eta = bernoulli_mask(parent.len(), p, &mut stream.replicate(r).rng());
            usize::from(!annulus_vacant_circuit(&parent.select(&eta), &ann))
        })
        .sum();
    Ok(hits as f64 / replicates as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: f64) -> Vec<Point> {
        let mut out = Vec::new();
        let mut x = -0.5 * n - 0.5;
        while x <= 0.5 * n + 0.5 {
            out.push(Point::new(x, 0.0));
            x += 1.9;
        }
        out
    }

    #[test]
    fn empty_eta_queries_the_start_strip_only() {
        let region = Rect::square(22.0).unwrap();
        let b = crate::sampling::sample_poisson(region, 1.0, RngStream::new(3, 0)).unwrap();
        let eta = vec![false; b.len()];
        let t = run_water_algorithm(&b, &eta, 20.0, StartSide::Left).unwrap();
        assert_eq!(t.rounds, 1);
        assert!(!t.output);
        assert!(t.active_final.is_empty());
        let expected: Vec<usize> = (0..b.len()).filter(|&i| (b.points[i].x + 10.0).abs() <= 2.0).collect();
        assert_eq!(t.queried, expected);
    }

    #[test]
    fn water_follows_a_chain() {
        let pts = chain(20.0);
        let b = PointSet::new(pts.clone(), Rect::square(22.0).unwrap());
        let eta = vec![true; pts.len()];
        for side in [StartSide::Left, StartSide::Right] {
            let t = run_water_algorithm(&b, &eta, 20.0, side).unwrap();
            assert!(t.output);
            let mut q = t.queried.clone();
            q.sort_unstable();
            assert_eq!(q, (0..pts.len()).collect::<Vec<_>>());
            assert_eq!(t.active_final, q);
        }
    }

    #[test]
    fn trivial_revealments() {
        let region = Rect::square(12.0).unwrap();
        let b = crate::sampling::sample_poisson(region, 1.0, RngStream::new(5, 0)).unwrap();
        let est = revealment_estimate(&b, 0.0, 10.0, RevealmentRegion::All, 20, RngStream::new(6, 0)).unwrap();
        for (&i, &e) in est.indices.iter().zip(&est.estimates) {
            let x = b.points[i].x;
            let near_start = if x >= 0.0 { (x + 5.0).abs() <= 2.0 } else { (x - 5.0).abs() <= 2.0 };
            assert_eq!(e, if near_start { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn trace_serialises() {
        let b = PointSet::new(chain(6.0), Rect::square(8.0).unwrap());
        let t = run_water_algorithm(&b, &vec![true; b.len()], 6.0, StartSide::Left).unwrap();
        let back: AlgorithmTrace = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }
}
