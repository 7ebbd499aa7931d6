//! Exact and log-space binomial arithmetic.

use statrs::function::gamma::ln_gamma;

/// `C(n, k)` exactly, `None` on overflow of `u128`.
pub fn choose(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        let num = u128::from(n - i);
        let den = u128::from(i + 1);
        let g = gcd(acc, den);
        let (a, d) = (acc / g, den / g);
        acc = a.checked_mul(num / d)?;
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `C(n, k)` as a float; exact whenever the value fits in 53 bits.
pub fn choose_f64(n: u64, k: u64) -> f64 {
    match choose(n, k) {
        Some(v) => v as f64,
        None => ln_choose(n, k).exp(),
    }
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `P(Bin(n, p) = k)`.
pub fn pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

/// `P(|Bin(n, p) − pn| ≥ a)` by exact summation of the mass function.
pub fn two_sided_tail(n: u64, p: f64, a: f64) -> f64 {
    let mean = p * n as f64;
    (0..=n)
        .filter(|&k| (k as f64 - mean).abs() >= a)
        .map(|k| pmf(n, p, k))
        .sum()
}

/// `P(|Bin(n, p) − pn| > a)`, the strict tail.
pub fn two_sided_tail_strict(n: u64, p: f64, a: f64) -> f64 {
    let mean = p * n as f64;
    (0..=n)
        .filter(|&k| (k as f64 - mean).abs() > a)
        .map(|k| pmf(n, p, k))
        .sum()
}

/// `P(Bin(n, p) < x)`.
pub fn cdf_below(n: u64, p: f64, x: f64) -> f64 {
    (0..=n).take_while(|&k| (k as f64) < x).map(|k| pmf(n, p, k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(choose(10, 3), Some(120));
        assert_eq!(choose(5, 0), Some(1));
        assert_eq!(choose(5, 6), Some(0));
        assert_eq!(choose(60, 30), Some(118_264_581_564_861_424));
        assert!(choose(1000, 500).is_none());
    }

    #[test]
    fn pascal_rule() {
        for n in 1..70u64 {
            for k in 1..n {
                assert_eq!(
                    choose(n, k).unwrap(),
                    choose(n - 1, k - 1).unwrap() + choose(n - 1, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn log_space_matches_exact() {
        for (n, k) in [(10u64, 3u64), (40, 20), (100, 7)] {
            let exact = choose(n, k).unwrap() as f64;
            assert!((ln_choose(n, k) - exact.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        let s: f64 = (0..=30).map(|k| pmf(30, 0.3, k)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
