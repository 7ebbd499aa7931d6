//! Hypergraphs on `[n]` with edges stored as bitmasks, and exact second-moment
//! computations for edge counts in random subsets.

mod bey;
mod bounds;
mod counts;
mod variance;

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{check_capacity, Error, Result};

pub use bey::{alpha, bey_check, degrees, y_t, BeyReport};
pub use bounds::{
    binmax_check, binom_identities_check, bincalc_check, chernoff_check, pmf_ratio_check, BincalcReport,
    BinomReport, ExactComparison, InequalityCheck,
};
pub use counts::{r_h, r_h_all, x_m, RhEstimate, RhMode, XmCount};
pub use variance::{
    quasi_monotone_dichotomy, second_moment_identity, var_q_rh, var_rh_fixed_k, var_xm_exact,
    DichotomyReport, SecondMoment, VarMode, VarQReport, VarRhReport, VarXmReport,
};

/// Structural cap on the vertex count (edges are `u64` masks).
pub const MAX_VERTICES: usize = 64;
/// Cap for computations over all `2^n` subsets.
pub const MAX_EXACT_N: usize = 22;

/// A set of edges, each a subset of `{0, …, n−1}` stored as a bitmask.
///
/// Edges are kept sorted and without duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<u64>,
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 { u64::MAX } else { (1u64 << n) - 1 }
}

impl Hypergraph {
    pub fn new(n: usize, mut edges: Vec<u64>) -> Result<Self> {
        check_capacity("hypergraph vertex count", n, MAX_VERTICES)?;
        if let Some(e) = edges.iter().find(|&&e| e & !full_mask(n) != 0) {
            return Err(Error::invalid(format!("edge {e:#b} has a vertex outside [n] for n = {n}")));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Hypergraph { n, edges })
    }

    /// Builds from vertex lists (0-based).
    pub fn from_sets(n: usize, sets: &[&[usize]]) -> Result<Self> {
        let mut edges = Vec::with_capacity(sets.len());
        for s in sets {
            let mut m = 0u64;
            for &v in *s {
                if v >= n {
                    return Err(Error::invalid(format!("vertex {v} outside [n] for n = {n}")));
                }
                m |= 1 << v;
            }
            edges.push(m);
        }
        Hypergraph::new(n, edges)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Hypergraph::new(n, Vec::new())
    }

    /// Every subset of `[n]`.
    pub fn powerset(n: usize) -> Result<Self> {
        check_capacity("powerset vertex count", n, MAX_EXACT_N)?;
        Hypergraph::new(n, (0..1u64 << n).collect())
    }

    /// All `m`-subsets of `[n]`.
    pub fn complete(n: usize, m: usize) -> Result<Self> {
        check_capacity("complete hypergraph vertex count", n, MAX_EXACT_N)?;
        Hypergraph::new(n, k_subsets(n, m).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn edges(&self) -> &[u64] {
        &self.edges
    }
    pub fn len(&self) -> usize {
        self.edges.len()
    }
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: u64) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }

    /// `H_m`: the edges of size `m`.
    pub fn layer(&self, m: usize) -> Vec<u64> {
        self.edges
            .iter()
            .copied()
            .filter(|e| e.count_ones() as usize == m)
            .collect()
    }

    /// `H_m` as its own hypergraph.
    pub fn uniform_part(&self, m: usize) -> Hypergraph {
        Hypergraph {
            n: self.n,
            edges: self.layer(m),
        }
    }

    /// `β_m = e(H_m) / C(n, m)`.
    pub fn beta(&self, m: usize) -> f64 {
        self.layer(m).len() as f64 / crate::binomial::choose_f64(self.n as u64, m as u64)
    }

    /// Dense indicator over all `2^n` subsets.
    pub(crate) fn indicator(&self) -> Result<Vec<f64>> {
        check_capacity("dense hypergraph vertex count", self.n, MAX_EXACT_N)?;
        let mut t = vec![0.0; 1 << self.n];
        for &e in &self.edges {
            t[e as usize] = 1.0;
        }
        Ok(t)
    }

    /// Text format: first line `n`, then one edge per line as increasing
    /// 1-based vertex indices separated by spaces; `-` denotes the empty
    /// edge. Blank lines and `#` comments are ignored.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<hypergraph>", e))?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            let Some(n) = n else {
                let v: usize = body.parse().map_err(|e| err(format!("vertex count: {e}")))?;
                check_capacity("hypergraph vertex count", v, MAX_VERTICES)?;
                n = Some(v);
                continue;
            };
            if body == "-" {
                edges.push(0);
                continue;
            }
            let mut mask = 0u64;
            let mut prev = 0usize;
            for tok in body.split_whitespace() {
                let v: usize = tok.parse().map_err(|e| err(format!("vertex {tok:?}: {e}")))?;
                if v == 0 || v > n {
                    return Err(err(format!("vertex {v} outside 1..={n}")));
                }
                if v <= prev {
                    return Err(err("vertices must be strictly increasing".into()));
                }
                prev = v;
                mask |= 1 << (v - 1);
            }
            edges.push(mask);
        }
        let n = n.ok_or_else(|| Error::Parse { line: 0, msg: "missing vertex count".into() })?;
        Hypergraph::new(n, edges)
    }

    pub fn write_text<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{}", self.n)?;
        for &e in &self.edges {
            if e == 0 {
                writeln!(out, "-")?;
                continue;
            }
            let verts: Vec<String> = (0..self.n)
                .filter(|v| e >> v & 1 == 1)
                .map(|v| (v + 1).to_string())
                .collect();
            writeln!(out, "{}", verts.join(" "))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Hypergraph::read_text(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_text(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }
}

/// All `k`-subsets of `[n]` in increasing numeric order (Gosper's hack).
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = u64> + Clone {
    let limit = full_mask(n);
    let first = if k > n { None } else if k == 0 { Some(0) } else { Some(full_mask(k)) };
    std::iter::successors(first, move |&x| {
        if x == 0 {
            return None;
        }
        let c = x & x.wrapping_neg();
        let r = x.checked_add(c)?;
        let next = (((r ^ x) >> 2) / c) | r;
        (next <= limit).then_some(next)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gosper_enumerates_all_k_subsets() {
        for n in 0..10 {
            for k in 0..=n + 1 {
                let subs: Vec<u64> = k_subsets(n, k).collect();
                let expected: Vec<u64> = (0..1u64 << n).filter(|m| m.count_ones() as usize == k).collect();
                assert_eq!(subs, expected, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let h = Hypergraph::from_sets(5, &[&[0, 1], &[1, 2], &[2, 3], &[]]).unwrap();
        let mut buf = Vec::new();
        h.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("5\n-\n1 2\n"));
        assert_eq!(Hypergraph::read_text(&buf[..]).unwrap(), h);
        assert!(Hypergraph::read_text("3\n2 1\n".as_bytes()).is_err());
        assert!(Hypergraph::read_text("3\n4\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_out_of_range_edges() {
        assert!(Hypergraph::new(3, vec![0b1000]).is_err());
        assert!(matches!(Hypergraph::new(65, vec![]), Err(Error::Capacity { .. })));
    }
}
