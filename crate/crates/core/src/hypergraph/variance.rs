use rand::Rng;

use super::bey::alpha_all;
use super::counts::r_h_all;
use super::{k_subsets, Hypergraph, MAX_EXACT_N};
use crate::binomial::{choose, choose_f64};
use crate::error::{check_capacity, check_probability, Error, Result};
use crate::fourier::weights_by_weight;
use crate::sampling::RngStream;

/// `X_m(S)` for every `S ⊂ [n]` (subset sums of the indicator of `H_m`).
fn xm_table(h: &Hypergraph, m: usize) -> Result<Vec<u32>> {
    check_capacity("exact enumeration vertex count", h.n(), MAX_EXACT_N)?;
    let mut t = vec![0u32; 1 << h.n()];
    for e in h.layer(m) {
        t[e as usize] = 1;
    }
    for i in 0..h.n() {
        let bit = 1usize << i;
        for x in 0..t.len() {
            if x & bit != 0 {
                t[x] += t[x ^ bit];
            }
        }
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarXmReport {
    pub mean: f64,
    pub variance: f64,
    /// `(48m/k)·C(k,m)²`.
    pub bound: f64,
    /// Variance of `X̃_m = X_m / C(k,m)`.
    pub normalized_variance: f64,
    /// `48m/k`.
    pub normalized_bound: f64,
    /// `Σ_S X_m(S)·C(n,m) = e(H_m)·C(k,m)·C(n,k)`, i.e. `E[X_m(B_k)] = β_m·C(k,m)`.
    pub mean_identity: bool,
    /// `n ≥ k ≥ m`, `n ≥ 3m³` and `n ≥ km/2`.
    pub hypotheses_hold: bool,
    pub holds: bool,
}

impl VarXmReport {
    pub fn violated(&self) -> bool {
        self.hypotheses_hold && !self.holds
    }
}

/// Exact `Var(X_m(B_k))` over all `k`-subsets of `[n]`.
pub fn var_xm_exact(h: &Hypergraph, k: usize, m: usize) -> Result<VarXmReport> {
    let n = h.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={n}")));
    }
    let table = xm_table(h, m)?;
    let (mut s1, mut s2, mut count) = (0u128, 0u128, 0u128);
    for s in k_subsets(n, k) {
        let x = table[s as usize] as u128;
        s1 += x;
        s2 += x * x;
        count += 1;
    }
    let numerator = count * s2 - s1 * s1;
    let variance = numerator as f64 / (count as f64 * count as f64);
    let ckm = choose_f64(k as u64, m as u64);
    let bound = 48.0 * m as f64 / k as f64 * ckm * ckm;
    let e = h.layer(m).len() as u128;
    let mean_identity = match (choose(n as u64, m as u64), choose(k as u64, m as u64)) {
        (Some(cnm), Some(ckm)) => s1 * cnm == e * ckm * count,
        _ => false,
    };
    let (nf, kf, mf) = (n as f64, k as f64, m as f64);
    Ok(VarXmReport {
        mean: s1 as f64 / count as f64,
        variance,
        bound,
        normalized_variance: if ckm > 0.0 { variance / (ckm * ckm) } else { 0.0 },
        normalized_bound: 48.0 * mf / kf,
        mean_identity,
        hypotheses_hold: n >= k && k >= m && nf >= 3.0 * mf.powi(3) && nf >= kf * mf / 2.0,
        holds: variance <= bound * (1.0 + 1e-12),
    })
}

/// Both sides of `E[X_m(B_k)²] = Σ_t α(H_m,t)·C(k,2m−t)/C(n,2m−t)`, scaled by
/// `C(n,k)` so that both are integers:
/// `Σ_S X_m(S)² = Σ_t α(H_m,t)·C(n−2m+t, k−2m+t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SecondMoment {
    pub direct: u128,
    pub formula: u128,
}

impl SecondMoment {
    pub fn equal(&self) -> bool {
        self.direct == self.formula
    }
}

pub fn second_moment_identity(h: &Hypergraph, k: usize, m: usize) -> Result<SecondMoment> {
    let n = h.n();
    let table = xm_table(h, m)?;
    let direct = k_subsets(n, k)
        .map(|s| {
            let x = table[s as usize] as u128;
            x * x
        })
        .sum();
    let alpha = alpha_all(&h.uniform_part(m));
    let mut formula = 0u128;
    for (t, &a) in alpha.iter().enumerate().take(m + 1) {
        let union = 2 * m - t;
        if union > k {
            continue;
        }
        let c = choose((n - union) as u64, (k - union) as u64).ok_or(Error::Capacity {
            what: "binomial coefficient",
            got: n,
            limit: 128,
        })?;
        formula += a as u128 * c;
    }
    Ok(SecondMoment { direct, formula })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarRhReport {
    pub mean: f64,
    pub variance: f64,
    /// `96p + 4exp(−pk/16)`.
    pub bound: f64,
    /// `n ≥ 24(pk)³` and `n ≥ 2pk²`.
    pub hypotheses_hold: bool,
    pub holds: bool,
}

impl VarRhReport {
    pub fn violated(&self) -> bool {
        self.hypotheses_hold && !self.holds
    }
}

fn mean_var(values: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let mean: f64 = values.clone().map(|(w, x)| w * x).sum();
    let var = values.map(|(w, x)| w * (x - mean) * (x - mean)).sum();
    (mean, var)
}

/// Exact variance of `r_H(B_k, p)` over uniform `k`-subsets `B_k`.
pub fn var_rh_fixed_k(h: &Hypergraph, k: usize, p: f64) -> Result<VarRhReport> {
    let n = h.n();
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    let r = r_h_all(h, p)?;
    let w = 1.0 / choose_f64(n as u64, k as u64);
    let (mean, variance) = mean_var(k_subsets(n, k).map(|s| (w, r[s as usize])));
    let pk = p * k as f64;
    let bound = 96.0 * p + 4.0 * (-pk / 16.0).exp();
    let nf = n as f64;
    Ok(VarRhReport {
        mean,
        variance,
        bound,
        hypotheses_hold: nf >= 24.0 * pk.powi(3) && nf >= 2.0 * pk * k as f64,
        holds: variance <= bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarMode {
    Exact,
    MonteCarlo { samples: usize, stream: RngStream },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarQReport {
    /// `E_q[r_H(B, p)]`.
    pub mean: f64,
    pub variance: f64,
    /// Standard errors of `mean` and `variance`; zero in exact mode.
    pub mean_stderr: f64,
    pub variance_stderr: f64,
    /// `P_{pq}(A ∈ H)`, which `mean` must equal.
    pub pq_probability: f64,
    /// `p·log²(1/p)`.
    pub bound_form: f64,
    /// `p ≤ 1/2`, `n ≥ 200(pqn)³`, `n ≥ 8p(qn)²` and `pqn ≥ 32 log(1/p)`.
    pub hypotheses_hold: bool,
}

impl VarQReport {
    /// `variance / (p·log²(1/p))`.
    pub fn fitted_constant(&self) -> f64 {
        self.variance / self.bound_form
    }
}

/// `P_r(A ∈ H)` for `A` an `r`-subset of `[n]`.
fn product_measure(h: &Hypergraph, r: f64) -> f64 {
    let w = weights_by_weight(h.n(), r);
    h.edges().iter().map(|e| w[e.count_ones() as usize]).sum()
}

/// `r_H(B, p)` by summing over the edges inside `B`.
fn r_h_sparse(h: &Hypergraph, b: u64, p: f64) -> f64 {
    let size = b.count_ones() as i32;
    h.edges()
        .iter()
        .filter(|&&e| e & !b == 0)
        .map(|e| {
            let s = e.count_ones() as i32;
            p.powi(s) * (1.0 - p).powi(size - s)
        })
        .sum()
}

/// `Var_q(r_H(B, p))` for `B` a `q`-subset of `[n]`.
///
/// Exact mode sums over all `2^n` sets `B` and is capped at
/// `n ≤ MAX_EXACT_N`; Monte Carlo mode samples `B` and evaluates `r_H`
/// exactly for each sample.
pub fn var_q_rh(h: &Hypergraph, q: f64, p: f64, mode: VarMode) -> Result<VarQReport> {
    check_probability("q", q)?;
    check_probability("p", p)?;
    let n = h.n();
    let (mean, variance, mean_stderr, variance_stderr) = match mode {
        VarMode::Exact => {
            let r = r_h_all(h, p)?;
            let w = weights_by_weight(n, q);
            let (mean, var) = mean_var(
                r.iter()
                    .enumerate()
                    .map(|(b, &x)| (w[b.count_ones() as usize], x)),
            );
            (mean, var, 0.0, 0.0)
        }
        VarMode::MonteCarlo { samples, stream } => {
            if samples < 2 {
                return Err(Error::invalid("Monte Carlo mode needs at least 2 samples"));
            }
            let mut rng = stream.rng();
            let values: Vec<f64> = (0..samples)
                .map(|_| {
                    let b = (0..n)
                        .filter(|_| rng.random::<f64>() < q)
                        .fold(0u64, |acc, v| acc | 1 << v);
                    r_h_sparse(h, b, p)
                })
                .collect();
            let s = samples as f64;
            let mean = values.iter().sum::<f64>() / s;
            let sq: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
            let var = sq.iter().sum::<f64>() / (s - 1.0);
            let var_of_sq = sq.iter().map(|d| (d - var) * (d - var)).sum::<f64>() / (s - 1.0);
            (mean, var, (var / s).sqrt(), (var_of_sq / s).sqrt())
        }
    };
    let log = (1.0 / p).ln();
    let qn = q * n as f64;
    let pqn = p * qn;
    let nf = n as f64;
    Ok(VarQReport {
        mean,
        variance,
        mean_stderr,
        variance_stderr,
        pq_probability: product_measure(h, p * q),
        bound_form: p * log * log,
        hypotheses_hold: p > 0.0
            && p <= 0.5
            && nf >= 200.0 * pqn.powi(3)
            && nf >= 8.0 * p * qn * qn
            && pqn >= 32.0 * log,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DichotomyReport {
    /// Every `B ∈ H_k` contains at least `(1−δ)·C(k,m)` edges of `H_m`.
    pub quasi_monotone: bool,
    pub h_m: usize,
    pub h_k: usize,
    /// `|H_m| ≥ (1−2δ)·C(n,m)`.
    pub first_branch: bool,
    /// `|H_k| ≤ (C·m/k)·C(n,k)`.
    pub second_branch: bool,
    /// The constant `C = 100/δ²` used for the second branch.
    pub witness: f64,
    /// `n ≥ max(3m³, km/2)`.
    pub hypotheses_hold: bool,
}

impl DichotomyReport {
    pub fn holds(&self) -> bool {
        self.first_branch || self.second_branch
    }

    /// Counts only when the instance is quasi monotone and the size
    /// hypotheses hold.
    pub fn violated(&self) -> bool {
        self.quasi_monotone && self.hypotheses_hold && !self.holds()
    }
}

pub fn quasi_monotone_dichotomy(h: &Hypergraph, delta: f64, k: usize, m: usize) -> Result<DichotomyReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if k == 0 || m > k || k > h.n() {
        return Err(Error::invalid(format!("need 1 ≤ k ≤ n and m ≤ k, got k={k} m={m}")));
    }
    let n = h.n();
    let table = xm_table(h, m)?;
    let layer_k = h.layer(k);
    let ckm = choose_f64(k as u64, m as u64);
    let quasi_monotone = layer_k
        .iter()
        .all(|&b| table[b as usize] as f64 >= (1.0 - delta) * ckm);
    let h_m = h.layer(m).len();
    let witness = 100.0 / (delta * delta);
    let (nf, kf, mf) = (n as f64, k as f64, m as f64);
    Ok(DichotomyReport {
        quasi_monotone,
        h_m,
        h_k: layer_k.len(),
        first_branch: h_m as f64 >= (1.0 - 2.0 * delta) * choose_f64(n as u64, m as u64),
        second_branch: layer_k.len() as f64 <= witness * mf / kf * choose_f64(n as u64, k as u64),
        witness,
        hypotheses_hold: nf >= (3.0 * mf.powi(3)).max(kf * mf / 2.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypergeometric_oracle_for_m_one() {
        let n = 15;
        let vertices = [0usize, 2, 3, 7, 8, 11, 14];
        let sets: Vec<&[usize]> = vertices.iter().map(std::slice::from_ref).collect();
        let h = Hypergraph::from_sets(n, &sets).unwrap();
        let k = 6;
        let r = var_xm_exact(&h, k, 1).unwrap();
        let (nf, kf, e) = (n as f64, k as f64, vertices.len() as f64);
        let hyper = kf * (e / nf) * (1.0 - e / nf) * (nf - kf) / (nf - 1.0);
        assert!((r.variance - hyper).abs() < 1e-12, "{} vs {hyper}", r.variance);
        assert!(r.mean_identity);
        assert!(r.hypotheses_hold && r.holds);
    }

    #[test]
    fn complete_and_empty_layers() {
        let h = Hypergraph::complete(10, 3).unwrap();
        assert_eq!(var_xm_exact(&h, 5, 3).unwrap().variance, 0.0);
        let e = Hypergraph::empty(10).unwrap();
        assert_eq!(var_xm_exact(&e, 5, 3).unwrap().variance, 0.0);
        let all = Hypergraph::powerset(8).unwrap();
        assert!(var_rh_fixed_k(&all, 4, 0.3).unwrap().variance.abs() < 1e-20);
        assert!(var_q_rh(&all, 0.4, 0.3, VarMode::Exact).unwrap().variance.abs() < 1e-20);
    }

    #[test]
    fn second_moment_on_small_example() {
        let h = Hypergraph::from_sets(7, &[&[0, 1], &[1, 2], &[2, 3], &[0, 6], &[4, 5]]).unwrap();
        for k in 0..=7 {
            assert!(second_moment_identity(&h, k, 2).unwrap().equal(), "k={k}");
        }
    }

    #[test]
    fn deterministic_b_has_no_variance() {
        let h = Hypergraph::from_sets(6, &[&[0], &[1, 2], &[3, 4, 5]]).unwrap();
        let r = var_q_rh(&h, 1.0, 0.3, VarMode::Exact).unwrap();
        assert!(r.variance.abs() < 1e-20);
        assert!((r.mean - r.pq_probability).abs() < 1e-14);
    }

    #[test]
    fn dichotomy_trivial_cases() {
        let all = Hypergraph::powerset(8).unwrap();
        let r = quasi_monotone_dichotomy(&all, 0.1, 4, 1).unwrap();
        assert!(r.quasi_monotone && r.first_branch);
        let only_m = Hypergraph::complete(8, 2).unwrap();
        let r = quasi_monotone_dichotomy(&only_m, 0.1, 4, 2).unwrap();
        assert!(r.quasi_monotone && r.h_k == 0 && r.second_branch);
    }
}
