use super::{Hypergraph, MAX_EXACT_N};
use crate::binomial::choose;
use crate::error::{check_capacity, Error, Result};

/// `d_H(T)` for every `T ⊂ [n]`: the number of edges containing `T`.
pub fn degrees(h: &Hypergraph) -> Result<Vec<u64>> {
    check_capacity("degree table vertex count", h.n(), MAX_EXACT_N)?;
    let mut d = vec![0u64; 1 << h.n()];
    for &e in h.edges() {
        d[e as usize] += 1;
    }
    for i in 0..h.n() {
        let bit = 1usize << i;
        for x in 0..d.len() {
            if x & bit == 0 {
                d[x] += d[x | bit];
            }
        }
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeyReport {
    /// `Σ_{|T|=t} d_H(T)²`.
    pub lhs: u128,
    pub rhs: f64,
    /// `n > m`; for `n = m` the right-hand side degenerates to zero.
    pub hypotheses_hold: bool,
    /// Decided in exact integer arithmetic.
    pub holds: bool,
}

/// `C(a, b)` with `C(a, b) = 0` for negative `a` or `b`, or `b > a`.
fn choose_signed(a: i64, b: i64) -> Result<u128> {
    if a < 0 || b < 0 || b > a {
        return Ok(0);
    }
    choose(a as u64, b as u64).ok_or(Error::Capacity {
        what: "binomial coefficient",
        got: a as usize,
        limit: 128,
    })
}

fn mul(xs: &[u128]) -> Result<u128> {
    xs.iter().try_fold(1u128, |acc, &x| acc.checked_mul(x)).ok_or(Error::Capacity {
        what: "u128 product",
        got: xs.len(),
        limit: 0,
    })
}

pub(super) fn uniform_order(h: &Hypergraph) -> Result<Option<usize>> {
    let mut sizes = h.edges().iter().map(|e| e.count_ones() as usize);
    let Some(m) = sizes.next() else { return Ok(None) };
    if sizes.any(|s| s != m) {
        return Err(Error::invalid("hypergraph is not uniform"));
    }
    Ok(Some(m))
}

/// Sum of squared `t`-set degrees of an `m`-uniform hypergraph against
/// `C(m,t)C(m−1,t)/C(n−1,t)·e² + C(m−1,t−1)C(n−t−1,m−t)·e`.
///
/// `m` is passed explicitly so the empty hypergraph is accepted.
pub fn bey_check(h: &Hypergraph, m: usize, t: usize) -> Result<BeyReport> {
    if let Some(order) = uniform_order(h)? {
        if order != m {
            return Err(Error::invalid(format!("edges have size {order}, expected {m}")));
        }
    }
    if t == 0 || t > m {
        return Err(Error::invalid(format!("t = {t} must lie in 1..={m}")));
    }
    let d = degrees(h)?;
    let lhs: u128 = d
        .iter()
        .enumerate()
        .filter(|(x, _)| x.count_ones() as usize == t)
        .map(|(_, &v)| v as u128 * v as u128)
        .sum();
    let (n, m, t) = (h.n() as i64, m as i64, t as i64);
    let e = h.len() as u128;
    let denom = choose_signed(n - 1, t)?;
    let first_num = mul(&[choose_signed(m, t)?, choose_signed(m - 1, t)?, e, e])?;
    let second = mul(&[choose_signed(m - 1, t - 1)?, choose_signed(n - t - 1, m - t)?, e])?;
    // With C(n−1, t) = 0 the numerator C(m−1, t) vanishes too; the term is read as 0.
    let (holds, rhs) = if denom == 0 {
        (lhs <= second, second as f64)
    } else {
        let scaled = first_num.checked_add(mul(&[second, denom])?).ok_or(Error::Capacity {
            what: "u128 sum",
            got: 2,
            limit: 0,
        })?;
        (
            mul(&[lhs, denom])? <= scaled,
            first_num as f64 / denom as f64 + second as f64,
        )
    };
    Ok(BeyReport {
        lhs,
        rhs,
        hypotheses_hold: n > m,
        holds,
    })
}

/// `α(H, t)`: ordered pairs `(e, f)` of edges of `H` with `|e ∩ f| = t`.
pub fn alpha(h: &Hypergraph, t: usize) -> u64 {
    alpha_all(h).get(t).copied().unwrap_or(0)
}

/// `α(H, t)` for `t = 0..=64`.
pub(super) fn alpha_all(h: &Hypergraph) -> Vec<u64> {
    let mut out = vec![0u64; 65];
    let edges = h.edges();
    for (i, &e) in edges.iter().enumerate() {
        out[e.count_ones() as usize] += 1;
        for &f in &edges[i + 1..] {
            out[(e & f).count_ones() as usize] += 2;
        }
    }
    out
}

/// `Y_t(k, m) = C(k, 2m−t)·C(2m−t, m)·C(m, t)`: ordered pairs of `m`-subsets
/// of a `k`-set meeting in exactly `t` elements.
pub fn y_t(k: usize, m: usize, t: usize) -> Result<u128> {
    let (k, m, t) = (k as i64, m as i64, t as i64);
    mul(&[
        choose_signed(k, 2 * m - t)?,
        choose_signed(2 * m - t, m)?,
        choose_signed(m, t)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_match_direct_count() {
        let h = Hypergraph::from_sets(5, &[&[0, 1, 2], &[1, 2, 3], &[0, 3, 4]]).unwrap();
        let d = degrees(&h).unwrap();
        for t in 0..32u64 {
            let direct = h.edges().iter().filter(|&&e| e & t == t).count() as u64;
            assert_eq!(d[t as usize], direct);
        }
    }

    #[test]
    fn single_edge() {
        let h = Hypergraph::from_sets(6, &[&[0, 2, 4]]).unwrap();
        let r = bey_check(&h, 3, 3).unwrap();
        assert_eq!(r.lhs, 1);
        assert!(r.rhs >= 1.0 && r.holds);
        assert_eq!(alpha(&h, 3), 1);
        let empty = Hypergraph::empty(6).unwrap();
        let r = bey_check(&empty, 2, 1).unwrap();
        assert_eq!(r.lhs, 0);
        assert!(r.holds);
    }

    #[test]
    fn y_values() {
        assert_eq!(y_t(4, 2, 1).unwrap(), 24);
        for (k, m) in [(4, 2), (10, 3), (12, 5), (7, 7)] {
            let total: u128 = (0..=m).map(|t| y_t(k, m, t).unwrap()).sum();
            let c = choose(k as u64, m as u64).unwrap();
            assert_eq!(total, c * c);
        }
    }

    #[test]
    fn alpha_of_complete_layer_is_y() {
        let h = Hypergraph::complete(7, 3).unwrap();
        for t in 0..=3 {
            assert_eq!(alpha(&h, t) as u128, y_t(7, 3, t).unwrap());
        }
    }
}
