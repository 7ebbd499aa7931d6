use rayon::prelude::*;

use super::{butterfly, check_density, BooleanFn, MAX_LAMBDA_N, MAX_PAIR_N};
use crate::error::{check_capacity, Result};

/// `h_f(X) = E[f(Z) | X]` with `X` uniform.
///
/// For `p ≤ 1/2`, `Z = X ∧ Y` with `Y` a `2p`-subset; for `p > 1/2`,
/// `Z_i = 1 − (1 − X_i) Y_i` with `Y` a `2(1−p)`-subset. Both make `Z`
/// `p`-distributed. The conditional expectation factorises over coordinates.
pub fn h_transform(f: &BooleanFn) -> BooleanFn {
    let p = f.p();
    let mut t = f.table().to_vec();
    if p <= 0.5 {
        let y = 2.0 * p;
        butterfly(&mut t, f.n(), |a, b| (a, y * b + (1.0 - y) * a));
    } else {
        let y = 2.0 * (1.0 - p);
        butterfly(&mut t, f.n(), |a, b| (y * a + (1.0 - y) * b, b));
    }
    for v in &mut t {
        *v = v.clamp(0.0, 1.0);
    }
    BooleanFn::new(f.n(), 0.5, t).expect("h_f stays in [0, 1]")
}

/// `M_K(X)`: sign of `Σ_{i∈K} (2X_i − 1)`, zero on ties.
pub fn majority(k: u32, x: u32) -> i8 {
    let ones = (k & x).count_ones() as i32;
    let total = k.count_ones() as i32;
    (2 * ones - total).signum() as i8
}

/// `E[f(Z) M_K(X)]` by both routes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MkCorrelation {
    /// Sum over all `(X, Y)` pairs; only for `n ≤ 12`.
    pub pairs: Option<f64>,
    /// `E[h_f(X) M_K(X)]` over uniform `X`.
    pub via_h: f64,
}

pub fn fz_mk_correlation(f: &BooleanFn, k: u32) -> Result<MkCorrelation> {
    let h = h_transform(f);
    let via_h = hf_mk_correlation(&h, k);
    let pairs = (f.n() <= MAX_PAIR_N).then(|| pair_sum(f, k));
    Ok(MkCorrelation { pairs, via_h })
}

fn pair_sum(f: &BooleanFn, k: u32) -> f64 {
    let n = f.n();
    let p = f.p();
    let full = (1u32 << n) - 1;
    let (y, low) = if p <= 0.5 { (2.0 * p, true) } else { (2.0 * (1.0 - p), false) };
    let py: Vec<f64> = (0..=n)
        .map(|j| y.powi(j as i32) * (1.0 - y).powi((n - j) as i32))
        .collect();
    let mut total = 0.0;
    for x in 0..=full {
        let m = majority(k, x);
        if m == 0 {
            continue;
        }
        let mut inner = 0.0;
        for yy in 0..=full {
            let z = if low { x & yy } else { full & !(!x & yy) };
            inner += py[yy.count_ones() as usize] * f.value(z);
        }
        total += f64::from(m) * inner;
    }
    total / f64::from(1u32 << n)
}

/// `E[h(X) M_K(X)]` for uniform `X`.
pub fn hf_mk_correlation(h: &BooleanFn, k: u32) -> f64 {
    let s: f64 = h
        .table()
        .iter()
        .enumerate()
        .map(|(x, &v)| v * f64::from(majority(k, x as u32)))
        .sum();
    s / h.table().len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaHf {
    pub value: f64,
    /// Mask of a maximising `K` (the smallest such mask).
    pub argmax: u32,
}

/// `Λ(h_f) = max_K E[h_f(X) M_K(X)]` over all `2^n` subsets `K`.
pub fn lambda_hf(f: &BooleanFn) -> Result<LambdaHf> {
    check_capacity("Lambda arity", f.n(), MAX_LAMBDA_N)?;
    check_density(f.p())?;
    let h = h_transform(f);
    let values: Vec<f64> = (0..1u32 << f.n())
        .into_par_iter()
        .map(|k| hf_mk_correlation(&h, k))
        .collect();
    let (argmax, value) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k as u32, v) } else { (bk, bv) });
    Ok(LambdaHf { value, argmax })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_cases() {
        assert_eq!(majority(0, 0b111), 0);
        assert_eq!(majority(0b1, 0b1), 1);
        assert_eq!(majority(0b1111, 0b0101), 0);
        assert_eq!(majority(0b111, 0b001), -1);
    }

    #[test]
    fn half_density_is_identity() {
        let f = BooleanFn::from_fn(3, 0.5, |w| f64::from(w) / 7.0).unwrap();
        assert_eq!(h_transform(&f).table(), f.table());
    }

    #[test]
    fn dictator_correlation() {
        let f = BooleanFn::dictator(1, 0.5, 0).unwrap();
        let c = fz_mk_correlation(&f, 1).unwrap();
        assert!((c.via_h - 0.5).abs() < 1e-15);
        assert!((c.pairs.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_has_no_correlation() {
        let f = BooleanFn::constant(4, 0.3, 0.6).unwrap();
        for k in 0..16 {
            let c = fz_mk_correlation(&f, k).unwrap();
            assert!(c.via_h.abs() < 1e-15 && c.pairs.unwrap().abs() < 1e-15);
        }
        assert!(lambda_hf(&f).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn majority_of_three_peaks_at_full_set() {
        let f = BooleanFn::majority_indicator(3, 0.5).unwrap();
        let l = lambda_hf(&f).unwrap();
        assert_eq!(l.argmax, 0b111);
        let h = h_transform(&f);
        for k in 0..8 {
            assert!(hf_mk_correlation(&h, k) <= l.value + 1e-15);
        }
    }
}
