use super::bey::y_t;
use crate::binomial::{cdf_below, choose, ln_choose, pmf, two_sided_tail_strict};
use crate::error::{check_probability, Error, Result};

/// A numeric inequality `lhs ≤ rhs` (or `<` where the statement is strict)
/// together with whether its stated hypotheses hold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub hypotheses_hold: bool,
    pub holds: bool,
}

impl InequalityCheck {
    /// A failure that counts against the statement.
    pub fn violated(&self) -> bool {
        self.hypotheses_hold && !self.holds
    }
}

/// An integer comparison decided exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactComparison {
    pub lhs: u128,
    pub rhs: u128,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinomReport {
    /// `C(k,m)² = Σ_t Y_t(k,m)`; `holds` means equality.
    pub a: ExactComparison,
    /// `C(m−1,t)·C(n,m)² ≤ C(n,2m−t)·C(2m−t,m)·C(n−1,t)`.
    pub b: ExactComparison,
    /// `C(m−1,t−1)·C(n−t−1,m−t)·C(n,m) ≤ (2t/m)·C(n,2m−t)·C(2m−t,m)·C(m,t)`,
    /// compared after multiplying both sides by `m`.
    pub c: ExactComparison,
    /// `k ≥ m ≥ t ≥ 1` and `n ≥ 3m³`.
    pub hypotheses_hold: bool,
}

fn overflow() -> Error {
    Error::Capacity {
        what: "u128 binomial product",
        got: 129,
        limit: 128,
    }
}

fn c(a: i64, b: i64) -> Result<u128> {
    if a < 0 || b < 0 || b > a {
        return Ok(0);
    }
    choose(a as u64, b as u64).ok_or_else(overflow)
}

fn prod(xs: &[u128]) -> Result<u128> {
    xs.iter().try_fold(1u128, |acc, &x| acc.checked_mul(x)).ok_or_else(overflow)
}

pub fn binom_identities_check(n: usize, k: usize, m: usize, t: usize) -> Result<BinomReport> {
    let ck = c(k as i64, m as i64)?;
    let a_lhs = prod(&[ck, ck])?;
    let a_rhs = (0..=m).try_fold(0u128, |acc, s| {
        acc.checked_add(y_t(k, m, s)?).ok_or_else(overflow)
    })?;
    let (n, m, t) = (n as i64, m as i64, t as i64);
    let cnm = c(n, m)?;
    let b_lhs = prod(&[c(m - 1, t)?, cnm, cnm])?;
    let b_rhs = prod(&[c(n, 2 * m - t)?, c(2 * m - t, m)?, c(n - 1, t)?])?;
    let c_lhs = prod(&[m as u128, c(m - 1, t - 1)?, c(n - t - 1, m - t)?, cnm])?;
    let c_rhs = prod(&[2 * t.max(0) as u128, c(n, 2 * m - t)?, c(2 * m - t, m)?, c(m, t)?])?;
    let hypotheses_hold = k as i64 >= m && m >= t && t >= 1 && n >= 3 * m * m * m;
    Ok(BinomReport {
        a: ExactComparison { lhs: a_lhs, rhs: a_rhs, holds: a_lhs == a_rhs },
        b: ExactComparison { lhs: b_lhs, rhs: b_rhs, holds: b_lhs <= b_rhs },
        c: ExactComparison { lhs: c_lhs, rhs: c_rhs, holds: c_lhs <= c_rhs },
        hypotheses_hold,
    })
}

/// `P(|ξ_{n,p} − pn| > a)` against `2exp(−a²/(4pn))` for `a ≤ pn/2` (or
/// `p = 1/2`) and `2exp(−pn/16)` otherwise. The inequality is strict.
pub fn chernoff_check(n: u64, p: f64, a: f64) -> Result<InequalityCheck> {
    check_probability("p", p)?;
    let pn = p * n as f64;
    let lhs = two_sided_tail_strict(n, p, a);
    let rhs = if a <= pn / 2.0 || p == 0.5 {
        2.0 * (-a * a / (4.0 * pn)).exp()
    } else {
        2.0 * (-pn / 16.0).exp()
    };
    Ok(InequalityCheck {
        lhs,
        rhs,
        hypotheses_hold: n >= 1 && p > 0.0 && p < 1.0 && a > 0.0,
        holds: lhs < rhs,
    })
}

/// `max_a P(ξ_{n,p} = a)` against `C/√(np(1−p))`.
pub fn binmax_check(n: u64, p: f64, constant: f64) -> Result<InequalityCheck> {
    check_probability("p", p)?;
    let mode = ((n + 1) as f64 * p).floor() as u64;
    let lhs = [mode.saturating_sub(1), mode, (mode + 1).min(n)]
        .into_iter()
        .map(|a| pmf(n, p, a))
        .fold(0.0, f64::max);
    let rhs = constant / (n as f64 * p * (1.0 - p)).sqrt();
    Ok(InequalityCheck {
        lhs,
        rhs,
        hypotheses_hold: n >= 1 && p > 0.0 && p < 1.0,
        holds: lhs <= rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BincalcReport {
    /// `p ∈ (0, 1/2]`, `q ∈ (0, 1)` and `pqn ≥ 32 log(1/p)`.
    pub hypotheses_hold: bool,
    /// `P(|ξ_{n,q} − qn| > 2√(qn log(1/p))) ≤ 2p`.
    pub a: InequalityCheck,
    /// The chain `P(ξ < (16/p) log(1/p)) ≤ P(ξ < qn/2) ≤ 2e^{−qn/16} ≤ 2p`.
    pub b_chain: [f64; 4],
    pub b_holds: bool,
}

impl BincalcReport {
    pub fn violated(&self) -> bool {
        self.hypotheses_hold && !(self.a.holds && self.b_holds)
    }
}

pub fn bincalc_check(n: u64, p: f64, q: f64) -> Result<BincalcReport> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    let log = (1.0 / p).ln();
    let qn = q * n as f64;
    let hypotheses_hold = p > 0.0 && p <= 0.5 && q > 0.0 && q < 1.0 && p * qn >= 32.0 * log;
    let a_lhs = two_sided_tail_strict(n, q, 2.0 * (qn * log).sqrt());
    let a = InequalityCheck {
        lhs: a_lhs,
        rhs: 2.0 * p,
        hypotheses_hold,
        holds: a_lhs <= 2.0 * p,
    };
    let b_chain = [
        cdf_below(n, q, 16.0 / p * log),
        cdf_below(n, q, qn / 2.0),
        2.0 * (-qn / 16.0).exp(),
        2.0 * p,
    ];
    let b_holds = b_chain.windows(2).all(|w| w[0] <= w[1]);
    Ok(BincalcReport {
        hypotheses_hold,
        a,
        b_chain,
        b_holds,
    })
}

/// `|P(ξ_{k',p} = m) / P(ξ_{k,p} = m) − 1|` against `c·√p·log(1/p)`.
///
/// Hypotheses: `p ∈ (0, 1/4]`, `pqn ≥ 32 log(1/p)`,
/// `qn − 2√(qn log(1/p)) ≤ k ≤ k' ≤ qn + 2√(qn log(1/p))` and
/// `|m − pqn| ≤ 4√(pqn log(1/p))`.
pub fn pmf_ratio_check(
    n: u64,
    p: f64,
    q: f64,
    k: u64,
    k_prime: u64,
    m: u64,
    c: f64,
) -> Result<InequalityCheck> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    if m > k || k > k_prime {
        return Err(Error::invalid(format!("need m ≤ k ≤ k', got m={m} k={k} k'={k_prime}")));
    }
    let log = (1.0 / p).ln();
    let qn = q * n as f64;
    let spread = 2.0 * (qn * log).sqrt();
    let hypotheses_hold = p > 0.0
        && p <= 0.25
        && q > 0.0
        && q < 1.0
        && p * qn >= 32.0 * log
        && qn - spread <= k as f64
        && k_prime as f64 <= qn + spread
        && (m as f64 - p * qn).abs() <= 4.0 * (p * qn * log).sqrt();
    let ln_ratio = ln_choose(k_prime, m) - ln_choose(k, m) + (k_prime - k) as f64 * (1.0 - p).ln();
    let lhs = ln_ratio.exp_m1().abs();
    let rhs = c * p.sqrt() * log;
    Ok(InequalityCheck {
        lhs,
        rhs,
        hypotheses_hold,
        holds: lhs <= rhs,
    })
}
