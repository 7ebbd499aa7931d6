use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling::RngStream;

/// Outcome of the randomized falsification search for the prefix-sum bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptCertificate {
    /// `Σ a_i²`, the claimed maximum.
    pub value: f64,
    /// Largest `Σ c_i²` over all feasible candidates tried.
    pub best_candidate: f64,
    pub candidates: usize,
    /// Whether every candidate stayed at or below `value`.
    pub certified: bool,
}

/// Whether `c` is non-increasing, non-negative, with prefix sums dominated by those of `a`.
pub fn is_feasible(a: &[f64], c: &[f64], tol: f64) -> bool {
    if a.len() != c.len() || c.iter().any(|&x| x < -tol) {
        return false;
    }
    if c.windows(2).any(|w| w[0] < w[1] - tol) {
        return false;
    }
    let (mut sa, mut sc) = (0.0, 0.0);
    a.iter().zip(c).all(|(x, y)| {
        sa += x;
        sc += y;
        sc <= sa + tol
    })
}

/// Largest `t ≥ 0` with `t·c` feasible, for `c` non-increasing and non-negative.
fn feasible_scale(a: &[f64], c: &[f64]) -> f64 {
    let (mut sa, mut sc) = (0.0, 0.0);
    let mut t = f64::INFINITY;
    for (x, y) in a.iter().zip(c) {
        sa += x;
        sc += y;
        if sc > 0.0 {
            t = t.min(sa / sc);
        }
    }
    if t.is_finite() { t } else { 0.0 }
}

/// Claims `max Σ c_i² = Σ a_i²` over non-increasing `c ≥ 0` whose prefix sums
/// are dominated by those of `a`, and tries to refute it with `candidates`
/// random feasible points: scaled random non-increasing vectors and block
/// averages of `a`.
pub fn prefix_constrained_sq_max(a: &[f64], candidates: usize, stream: RngStream) -> Result<OptCertificate> {
    if a.is_empty() {
        return Err(Error::invalid("a must be non-empty"));
    }
    if a.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::invalid("entries of a must be positive"));
    }
    if a.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("a must be non-increasing"));
    }
    let value: f64 = a.iter().map(|x| x * x).sum();
    let mut rng = stream.rng();
    let n = a.len();
    let mut best = 0.0_f64;
    for t in 0..candidates {
        let c: Vec<f64> = if t % 2 == 0 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(rng.random_range(1..4))).collect();
            v.sort_by(|x, y| y.total_cmp(x));
            let s = feasible_scale(a, &v);
            v.iter().map(|x| x * s).collect()
        } else {
            // Average a over random consecutive blocks.
            let mut c = Vec::with_capacity(n);
            let mut start = 0;
            while start < n {
                let len = rng.random_range(1..=n - start);
                let avg = a[start..start + len].iter().sum::<f64>() / len as f64;
                c.extend(std::iter::repeat_n(avg, len));
                start += len;
            }
            c
        };
        debug_assert!(is_feasible(a, &c, 1e-9));
        best = best.max(c.iter().map(|x| x * x).sum());
    }
    Ok(OptCertificate {
        value,
        best_candidate: best,
        candidates,
        certified: best <= value * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry() {
        let c = prefix_constrained_sq_max(&[1.0], 10, RngStream::new(1, 0)).unwrap();
        assert_eq!(c.value, 1.0);
        assert!(c.certified);
    }

    #[test]
    fn explicit_feasible_point() {
        let a = [2.0, 1.0];
        assert!(is_feasible(&a, &[1.5, 1.5], 0.0));
        assert!(!is_feasible(&a, &[2.5, 0.0], 0.0));
        let c = prefix_constrained_sq_max(&a, 100, RngStream::new(2, 0)).unwrap();
        assert_eq!(c.value, 5.0);
        assert!(4.5 < c.value && c.certified);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(prefix_constrained_sq_max(&[1.0, 2.0], 1, RngStream::new(1, 0)).is_err());
        assert!(prefix_constrained_sq_max(&[1.0, 0.0], 1, RngStream::new(1, 0)).is_err());
    }
}
