use rand::Rng;

use super::{Hypergraph, MAX_EXACT_N};
use crate::error::{check_capacity, check_probability, Error, Result};
use crate::fourier::{butterfly, weights_by_weight as weights};
use crate::sampling::RngStream;

/// `X_m(S)` and `X̃_m(S) = X_m(S) / C(|S|, m)`; the latter is `None` when `m > |S|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XmCount {
    pub count: u64,
    pub normalized: Option<f64>,
}

pub fn x_m(s: u64, h: &Hypergraph, m: usize) -> XmCount {
    let count = h
        .edges()
        .iter()
        .filter(|&&e| e.count_ones() as usize == m && e & !s == 0)
        .count() as u64;
    let size = s.count_ones() as u64;
    let normalized = (m as u64 <= size)
        .then(|| count as f64 / crate::binomial::choose_f64(size, m as u64));
    XmCount { count, normalized }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhMode {
    Exact,
    MonteCarlo { samples: usize, stream: RngStream },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhEstimate {
    pub value: f64,
    /// Zero in exact mode.
    pub stderr: f64,
}

/// `r_H(B, p) = P(A ∈ H)` for `A` a `p`-subset of `B`.
pub fn r_h(b: u64, p: f64, h: &Hypergraph, mode: RhMode) -> Result<RhEstimate> {
    check_probability("p", p)?;
    let size = b.count_ones() as usize;
    match mode {
        RhMode::Exact => {
            check_capacity("exact r_H subset size", size, MAX_EXACT_N)?;
            let w = weights(size, p);
            let value = h
                .edges()
                .iter()
                .filter(|&&e| e & !b == 0)
                .map(|e| w[e.count_ones() as usize])
                .sum();
            Ok(RhEstimate { value, stderr: 0.0 })
        }
        RhMode::MonteCarlo { samples, stream } => {
            if samples < 2 {
                return Err(Error::invalid("Monte Carlo mode needs at least 2 samples"));
            }
            let verts: Vec<u32> = (0..64).filter(|v| b >> v & 1 == 1).collect();
            let mut rng = stream.rng();
            let hits = (0..samples)
                .filter(|_| {
                    let a = verts
                        .iter()
                        .filter(|_| rng.random::<f64>() < p)
                        .fold(0u64, |acc, &v| acc | 1 << v);
                    h.contains(a)
                })
                .count();
            let value = hits as f64 / samples as f64;
            let stderr = (value * (1.0 - value) / (samples - 1) as f64).sqrt();
            Ok(RhEstimate { value, stderr })
        }
    }
}

/// `r_H(B, p)` for every `B ⊂ [n]` at once, indexed by mask.
///
/// Conditioning on one coordinate at a time gives
/// `r(B) = p·r_{i∈A}(B) + (1−p)·r(B∖{i})`, applied as a butterfly to the
/// indicator of `H`.
pub fn r_h_all(h: &Hypergraph, p: f64) -> Result<Vec<f64>> {
    check_probability("p", p)?;
    let mut t = h.indicator()?;
    butterfly(&mut t, h.n(), |a, b| (a, p * b + (1.0 - p) * a));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_count() {
        let h = Hypergraph::from_sets(5, &[&[0, 1], &[1, 2], &[2, 3]]).unwrap();
        let c = x_m(0b00111, &h, 2);
        assert_eq!(c.count, 2);
        assert!((c.normalized.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(x_m(0b1, &h, 2).normalized, None);
    }

    #[test]
    fn trivial_hypergraphs() {
        let b = 0b11_0110u64;
        let p = 0.3;
        let only_empty = Hypergraph::new(6, vec![0]).unwrap();
        let r = r_h(b, p, &only_empty, RhMode::Exact).unwrap().value;
        assert!((r - 0.7f64.powi(4)).abs() < 1e-15);
        let all = Hypergraph::powerset(6).unwrap();
        assert!((r_h(b, p, &all, RhMode::Exact).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn butterfly_matches_edge_sum() {
        let h = Hypergraph::new(5, vec![0b1, 0b11, 0b10100, 0b11111, 0b01010]).unwrap();
        let all = r_h_all(&h, 0.35).unwrap();
        for b in 0..32u64 {
            let direct = r_h(b, 0.35, &h, RhMode::Exact).unwrap().value;
            assert!((all[b as usize] - direct).abs() < 1e-14);
        }
    }
}
