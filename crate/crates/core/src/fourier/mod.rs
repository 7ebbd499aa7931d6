//! Exact analysis of functions `{0,1}^n → [0,1]` under the `p`-biased product measure.
//!
//! Inputs and subsets are bitmasks: bit `i` of `ω` is coordinate `i`
//! (0-based), and a subset `S ⊂ [n]` is the mask of its elements.

mod generate;
mod htransform;
mod influence;
mod opt;
mod revealment;

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{check_capacity, Error, Result};

pub use generate::{random_function, random_monotone, tribes};
pub use htransform::{
    fz_mk_correlation, h_transform, hf_mk_correlation, lambda_hf, majority, LambdaHf,
    MkCorrelation,
};
pub use influence::{ii_p, influence, influences};
pub use opt::{prefix_constrained_sq_max, OptCertificate};
pub use revealment::{
    exact_revealment, ss_bound_check, DecisionTree, QueryAlgorithm, SsLevel, SsReport,
};

/// Largest `n` for which a full truth table is stored.
pub const MAX_TABLE_N: usize = 24;
/// Largest `n` for routes that sum over pairs of inputs (`4^n` terms).
pub const MAX_PAIR_N: usize = 12;
/// Largest `n` for the maximum over all subsets `K`.
pub const MAX_LAMBDA_N: usize = 16;

/// Truth table of `f : {0,1}^n → [0,1]` together with its density `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct BooleanFn {
    n: usize,
    p: f64,
    table: Vec<f64>,
}

pub(crate) fn check_density(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("density p must lie in (0, 1), got {p}")))
    }
}

impl BooleanFn {
    pub fn new(n: usize, p: f64, table: Vec<f64>) -> Result<Self> {
        check_capacity("boolean function arity", n, MAX_TABLE_N)?;
        check_density(p)?;
        if table.len() != 1 << n {
            return Err(Error::invalid(format!(
                "table for n = {n} needs {} values, got {}",
                1usize << n,
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("table value {v} outside [0, 1]")));
        }
        Ok(BooleanFn { n, p, table })
    }

    pub fn from_fn(n: usize, p: f64, f: impl Fn(u32) -> f64) -> Result<Self> {
        check_capacity("boolean function arity", n, MAX_TABLE_N)?;
        BooleanFn::new(n, p, (0..1u32 << n).map(f).collect())
    }

    pub fn constant(n: usize, p: f64, c: f64) -> Result<Self> {
        BooleanFn::from_fn(n, p, |_| c)
    }

    /// `f(ω) = ω_i`.
    pub fn dictator(n: usize, p: f64, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::invalid(format!("coordinate {i} out of range for n = {n}")));
        }
        BooleanFn::from_fn(n, p, |w| f64::from((w >> i) & 1))
    }

    /// `f(ω) = ω_1 ⊕ … ⊕ ω_n`.
    pub fn parity(n: usize, p: f64) -> Result<Self> {
        BooleanFn::from_fn(n, p, |w| f64::from(w.count_ones() & 1))
    }

    /// Indicator that strictly more than half of the bits are 1.
    pub fn majority_indicator(n: usize, p: f64) -> Result<Self> {
        BooleanFn::from_fn(n, p, |w| f64::from(2 * w.count_ones() as usize > n))
    }

    pub fn or(n: usize, p: f64) -> Result<Self> {
        BooleanFn::from_fn(n, p, |w| f64::from(w != 0))
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn table(&self) -> &[f64] {
        &self.table
    }
    pub fn value(&self, omega: u32) -> f64 {
        self.table[omega as usize]
    }

    /// Same table read under another density.
    pub fn with_density(&self, p: f64) -> Result<Self> {
        check_density(p)?;
        Ok(BooleanFn { p, ..self.clone() })
    }

    /// `P_p(ω)` indexed by the number of ones.
    pub(crate) fn weights_by_weight(&self) -> Vec<f64> {
        weights_by_weight(self.n, self.p)
    }

    pub fn measure(&self, omega: u32) -> f64 {
        self.p.powi(omega.count_ones() as i32) * (1.0 - self.p).powi((self.n as u32 - omega.count_ones()) as i32)
    }

    /// `E_p[g(f(ω))]` by exact enumeration.
    pub fn expect(&self, g: impl Fn(u32, f64) -> f64) -> f64 {
        let w = self.weights_by_weight();
        self.table
            .iter()
            .enumerate()
            .map(|(o, &v)| w[(o as u32).count_ones() as usize] * g(o as u32, v))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|_, v| v)
    }

    pub fn second_moment(&self) -> f64 {
        self.expect(|_, v| v * v)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// Whether `ω ⊂ ω′` implies `f(ω) ≤ f(ω′)`; checked on covering pairs.
    pub fn is_monotone(&self) -> bool {
        (0..1u32 << self.n).all(|w| {
            (0..self.n).all(|i| w & (1 << i) != 0 || self.value(w) <= self.value(w | (1 << i)))
        })
    }

    /// Reads the text format: a header line `n p`, then `2^n` values, one per
    /// line or whitespace-separated, in lexicographic order of `(ω_1, …, ω_n)`
    /// with `ω_1` most significant.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut tokens = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<boolean function>", e))?;
            let body = line.split('#').next().unwrap_or("");
            tokens.extend(body.split_whitespace().map(|t| (lineno + 1, t.to_owned())));
        }
        let mut it = tokens.into_iter();
        let mut next = |what: &str| {
            it.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing {what}"),
            })
        };
        let (l, t) = next("n")?;
        let n: usize = t.parse().map_err(|e| Error::Parse { line: l, msg: format!("n: {e}") })?;
        check_capacity("boolean function arity", n, MAX_TABLE_N)?;
        let (l, t) = next("p")?;
        let p: f64 = t.parse().map_err(|e| Error::Parse { line: l, msg: format!("p: {e}") })?;
        let mut table = vec![0.0; 1 << n];
        for lex in 0..1u32 << n {
            let (l, t) = next("table value")?;
            let v: f64 = t.parse().map_err(|e| Error::Parse { line: l, msg: format!("value: {e}") })?;
            table[lex_to_mask(lex, n) as usize] = v;
        }
        if let Some((l, t)) = it.next() {
            return Err(Error::Parse {
                line: l,
                msg: format!("unexpected trailing token {t:?}"),
            });
        }
        BooleanFn::new(n, p, table)
    }

    pub fn write_text<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{} {:?}", self.n, self.p)?;
        for lex in 0..1u32 << self.n {
            writeln!(out, "{:?}", self.value(lex_to_mask(lex, self.n)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        BooleanFn::read_text(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_text(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }
}

/// Lexicographic position (with `ω_1` most significant) to internal bitmask.
fn lex_to_mask(lex: u32, n: usize) -> u32 {
    (0..n).fold(0, |acc, i| acc | (((lex >> (n - 1 - i)) & 1) << i))
}

pub(crate) fn weights_by_weight(n: usize, p: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
        .collect()
}

/// Value of the single-coordinate character on `ω_i = 1`.
fn chi_one(p: f64) -> f64 {
    -((1.0 - p) / p).sqrt()
}

/// Value of the single-coordinate character on `ω_i = 0`.
fn chi_zero(p: f64) -> f64 {
    (p / (1.0 - p)).sqrt()
}

/// `χ_S^p(ω) = ∏_{i∈S} χ_i^p(ω)`; `χ_∅ ≡ 1`.
pub fn chi(s: u32, omega: u32, p: f64) -> Result<f64> {
    check_density(p)?;
    Ok(chi_unchecked(s, omega, p))
}

pub(crate) fn chi_unchecked(s: u32, omega: u32, p: f64) -> f64 {
    let ones = (s & omega).count_ones() as i32;
    let zeros = (s & !omega).count_ones() as i32;
    chi_one(p).powi(ones) * chi_zero(p).powi(zeros)
}

/// Fourier-Walsh coefficients `f̂^p(S)`, indexed by the mask of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    n: usize,
    p: f64,
    coefficients: Vec<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
    pub fn coefficient(&self, s: u32) -> f64 {
        self.coefficients[s as usize]
    }

    /// `Σ_S f̂^p(S)²`.
    pub fn total_mass(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// `Σ_{|S| = k} f̂^p(S)²` for `k = 0..=n`.
    pub fn level_masses(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (s, c) in self.coefficients.iter().enumerate() {
            out[(s as u32).count_ones() as usize] += c * c;
        }
        out
    }

    /// `Σ_S f̂^p(S) χ_S^p(ω)` summed term by term.
    pub fn reconstruct(&self, omega: u32) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(s, c)| c * chi_unchecked(s as u32, omega, self.p))
            .sum()
    }

    /// All values `f(ω)` via the inverse butterfly.
    pub fn to_table(&self) -> Vec<f64> {
        let mut t = self.coefficients.clone();
        let (z, o) = (chi_zero(self.p), chi_one(self.p));
        butterfly(&mut t, self.n, |c0, c1| (c0 + z * c1, c0 + o * c1));
        t
    }
}

/// Applies a 2×2 map to every coordinate pair `(x with bit i = 0, x with bit i = 1)`.
pub(crate) fn butterfly(t: &mut [f64], n: usize, f: impl Fn(f64, f64) -> (f64, f64)) {
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..t.len() {
            if x & bit == 0 {
                let (a, b) = f(t[x], t[x | bit]);
                t[x] = a;
                t[x | bit] = b;
            }
        }
    }
}

/// Exact spectrum in `O(n 2^n)`: the transform factorises over coordinates.
pub fn spectrum(f: &BooleanFn) -> Spectrum {
    let p = f.p;
    let mut t = f.table.clone();
    let (z, o) = (chi_zero(p), chi_one(p));
    butterfly(&mut t, f.n, |a, b| {
        ((1.0 - p) * a + p * b, (1.0 - p) * z * a + p * o * b)
    });
    Spectrum {
        n: f.n,
        p,
        coefficients: t,
    }
}

pub fn reconstruct(spec: &Spectrum, omega: u32) -> f64 {
    spec.reconstruct(omega)
}

/// The two routes to `Cov(f(ω), f(ω^ε))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseCorrelation {
    /// `Σ_{S≠∅} f̂^p(S)² (1−ε)^{|S|}`.
    pub spectral: f64,
    /// `E_p[f(ω) f(ω^ε)] − E_p[f]²` summed over all pairs `(ω, ω^ε)`.
    pub direct: f64,
}

pub fn noise_correlation_exact(f: &BooleanFn, epsilon: f64) -> Result<NoiseCorrelation> {
    crate::error::check_probability("epsilon", epsilon)?;
    check_capacity("pair-sum arity", f.n, MAX_PAIR_N)?;
    let spec = spectrum(f);
    let spectral = spec
        .coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(s, c)| c * c * (1.0 - epsilon).powi((s as u32).count_ones() as i32))
        .sum();
    let k = crate::noise::bit_kernel(epsilon, f.p);
    let n = f.n as i32;
    let full = (1u32 << f.n) - 1;
    let w = f.weights_by_weight();
    let mut joint = 0.0;
    for a in 0..=full {
        let fa = f.value(a);
        if fa == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for b in 0..=full {
            let n11 = (a & b).count_ones() as i32;
            let n10 = (a & !b).count_ones() as i32;
            let n01 = (!a & b & full).count_ones() as i32;
            let n00 = n - n11 - n10 - n01;
            let t = k[0][0].powi(n00) * k[0][1].powi(n01) * k[1][0].powi(n10) * k[1][1].powi(n11);
            inner += t * f.value(b);
        }
        joint += w[a.count_ones() as usize] * fa * inner;
    }
    let mean = f.mean();
    Ok(NoiseCorrelation {
        spectral,
        direct: joint - mean * mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_values() {
        assert_eq!(chi(0, 0b1011, 0.3).unwrap(), 1.0);
        assert_eq!(chi(1, 1, 0.5).unwrap(), -1.0);
        assert_eq!(chi(1, 0, 0.5).unwrap(), 1.0);
        assert!(chi(1, 0, 0.0).is_err());
        assert!(chi(1, 0, 1.0).is_err());
    }

    #[test]
    fn dictator_spectrum() {
        let f = BooleanFn::dictator(3, 0.5, 0).unwrap();
        let s = spectrum(&f);
        assert!((s.coefficient(0) - 0.5).abs() < 1e-15);
        assert!((s.coefficient(1) + 0.5).abs() < 1e-15);
        for m in 2..8 {
            assert!(s.coefficient(m).abs() < 1e-15);
        }
    }

    #[test]
    fn dictator_noise_correlation() {
        let f = BooleanFn::dictator(2, 0.3, 0).unwrap();
        let nc = noise_correlation_exact(&f, 0.5).unwrap();
        assert!((nc.spectral - 0.105).abs() < 1e-12);
        assert!((nc.direct - 0.105).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip_and_order() {
        // Lexicographic order: the second value is ω = (0, …, 0, 1), i.e. ω_n = 1.
        let text = "2 0.5\n0\n1\n0\n1\n";
        let f = BooleanFn::read_text(text.as_bytes()).unwrap();
        assert_eq!(f, BooleanFn::dictator(2, 0.5, 1).unwrap());
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        assert_eq!(BooleanFn::read_text(&buf[..]).unwrap(), f);
        assert!(BooleanFn::read_text("1 0.5\n0.2\n".as_bytes()).is_err());
        assert!(BooleanFn::read_text("1 0.5\n0.2\n1.5\n".as_bytes()).is_err());
    }

    #[test]
    fn capacity_guards() {
        assert!(matches!(
            BooleanFn::constant(25, 0.5, 0.0),
            Err(Error::Capacity { .. })
        ));
        let f = BooleanFn::constant(13, 0.5, 0.0).unwrap();
        assert!(matches!(noise_correlation_exact(&f, 0.1), Err(Error::Capacity { .. })));
    }
}
