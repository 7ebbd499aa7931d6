//! Monte Carlo estimators for the continuum and two-stage models.
//!
//! Replicate `i` of an estimator always draws from `stream.replicate(i)`,
//! results are collected in index order, and every reduction runs
//! sequentially over that order.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::{block_jackknife, mean_estimate, median, plug_in_covariance, proportion, Estimate, Z95};
use crate::error::{check_probability, Error, Result};
use crate::geometry::{crossing_threshold, occupied_horizontal_crossing};
use crate::noise::{continuum_perturb, epsilon_prime, perturb_bits};
use crate::sampling::{bernoulli_mask, sample_poisson_with, Point, PointSet, Rect, RngStream};
use crate::water::{one_arm_probability, revealment_estimate, RevealmentRegion};

/// Blocks used by the jackknife for covariance-type statistics.
pub const JACKKNIFE_BLOCKS: usize = 20;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

fn check_replicates(r: usize) -> Result<()> {
    if r == 0 {
        Err(Error::invalid("replicates must be at least 1"))
    } else {
        Ok(())
    }
}

/// `R_N` and the region `R_{N+2}` holding every centre whose disc meets it.
fn boxes(n: f64) -> Result<(Rect, Rect)> {
    check_positive("N", n)?;
    let rect = Rect::square(n)?;
    Ok((rect, rect.padded(1.0)))
}

fn par_replicates<T: Send>(replicates: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..replicates as u64).into_par_iter().map(f).collect()
}

/// Horizontal crossing frequency of `R_N` under `Poisson(λ)`.
pub fn crossing_probability(n: f64, lambda: f64, replicates: usize, stream: RngStream) -> Result<Estimate> {
    check_positive("lambda", lambda)?;
    check_replicates(replicates)?;
    let (rect, region) = boxes(n)?;
    let hits = par_replicates(replicates, |i| {
        let pts = sample_poisson_with(region, lambda, &mut stream.replicate(i).rng())?;
        Ok(occupied_horizontal_crossing(&pts, &rect))
    })?;
    Ok(proportion(hits.iter().filter(|&&h| h).count(), replicates))
}

/// Crossing frequency at each intensity of a grid, one stream per grid point.
pub fn crossing_curve(n: f64, lambdas: &[f64], replicates: usize, stream: RngStream) -> Result<Vec<(f64, Estimate)>> {
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &l)| Ok((l, crossing_probability(n, l, replicates, stream.child(k as u64))?)))
        .collect()
}

/// Per replicate, the smallest intensity `λ ≤ λ_max` at which `R_N` is
/// crossed, or `+∞`.
///
/// A `Poisson(λ_max)` configuration with independent uniform marks `u`
/// restricts to `Poisson(λ)` on `{u ≤ λ/λ_max}`, so one pass per replicate
/// gives the crossing indicator at every intensity.
pub fn crossing_thresholds(n: f64, lambda_max: f64, replicates: usize, stream: RngStream) -> Result<Vec<f64>> {
    check_positive("lambda_max", lambda_max)?;
    check_replicates(replicates)?;
    let (rect, region) = boxes(n)?;
    par_replicates(replicates, |i| {
        let mut rng = stream.replicate(i).rng();
        let pts = sample_poisson_with(region, lambda_max, &mut rng)?;
        let marks: Vec<f64> = (0..pts.len()).map(|_| rng.random::<f64>()).collect();
        Ok(crossing_threshold(&pts, &marks, &rect).map_or(f64::INFINITY, |t| t * lambda_max))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub n: f64,
    pub lambda: f64,
    /// 95% interval from binomial order statistics of the thresholds.
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: usize,
    pub bracket: (f64, f64),
    /// `(λ, F̂(λ))` at every bisection probe.
    pub probes: Vec<(f64, f64)>,
}

impl LambdaEstimate {
    pub fn overlaps(&self, other: &LambdaEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Bisection for `P_λ(H(η, R_N, •)) = 1/2` on the empirical crossing
/// probability `F̂(λ) = #{thresholds ≤ λ} / replicates`.
///
/// Fails if `F̂(lo) ≥ 1/2` or `F̂(hi) < 1/2`.
pub fn estimate_lambda_c(
    n: f64,
    replicates: usize,
    bracket: (f64, f64),
    tol: f64,
    stream: RngStream,
) -> Result<LambdaEstimate> {
    let (lo0, hi0) = bracket;
    check_positive("bracket low end", lo0)?;
    check_positive("tolerance", tol)?;
    if hi0 <= lo0 {
        return Err(Error::invalid(format!("bracket ({lo0}, {hi0}) is empty")));
    }
    let mut t = crossing_thresholds(n, hi0, replicates, stream)?;
    t.sort_by(f64::total_cmp);
    let cdf = |l: f64| t.partition_point(|&x| x <= l) as f64 / t.len() as f64;
    let mut probes = vec![(lo0, cdf(lo0)), (hi0, cdf(hi0))];
    if cdf(lo0) >= 0.5 || cdf(hi0) < 0.5 {
        return Err(Error::SearchFailure(format!(
            "bracket ({lo0}, {hi0}) does not straddle 1/2: F({lo0}) = {}, F({hi0}) = {}",
            cdf(lo0),
            cdf(hi0)
        )));
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = cdf(mid);
        probes.push((mid, f));
        if f >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = t.len() as f64;
    let spread = Z95 * r.sqrt() / 2.0;
    let rank = |k: f64| t[(k.clamp(1.0, r) as usize) - 1];
    Ok(LambdaEstimate {
        n,
        lambda: 0.5 * (lo + hi),
        ci_low: rank((r / 2.0 - spread).floor()),
        ci_high: rank((r / 2.0 + spread).ceil()),
        replicates,
        bracket,
        probes,
    })
}

/// How `(η, η^ε)` is generated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum NoiseMode {
    /// Delete with probability `ε`, add `Poisson(ελ)`.
    Continuum,
    /// `B ~ Poisson(λ/p)`, `η` a `p`-subset, each membership bit re-drawn
    /// with probability `ε′ = ε/(1−p)`.
    TwoStage { p: f64 },
}

/// One paired replicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairRecord {
    pub before: bool,
    pub after: bool,
    pub size_before: usize,
    pub size_after: usize,
    pub common: usize,
}

pub fn noisy_pair_record(
    rect: &Rect,
    region: Rect,
    lambda: f64,
    epsilon: f64,
    mode: NoiseMode,
    stream: RngStream,
) -> Result<PairRecord> {
    match mode {
        NoiseMode::Continuum => {
            let pts = sample_poisson_with(region, lambda, &mut stream.child(0).rng())?;
            let eta = PointSet::new(pts, region);
            let pert = continuum_perturb(&eta, epsilon, lambda, region, stream.child(1))?;
            Ok(PairRecord {
                before: occupied_horizontal_crossing(&eta.points, rect),
                after: occupied_horizontal_crossing(&pert.after.points, rect),
                size_before: eta.len(),
                size_after: pert.after.len(),
                common: pert.survivors,
            })
        }
        NoiseMode::TwoStage { p } => {
            let eps_b = epsilon_prime(epsilon, p)?;
            let b = sample_poisson_with(region, lambda / p, &mut stream.child(0).rng())?;
            let before = bernoulli_mask(b.len(), p, &mut stream.child(1).rng());
            let after = perturb_bits(&before, eps_b, p, &mut stream.child(2).rng());
            let pick = |mask: &[bool]| -> Vec<Point> {
                b.iter().zip(mask).filter(|(_, &m)| m).map(|(&x, _)| x).collect()
            };
            let (eb, ea) = (pick(&before), pick(&after));
            Ok(PairRecord {
                before: occupied_horizontal_crossing(&eb, rect),
                after: occupied_horizontal_crossing(&ea, rect),
                size_before: eb.len(),
                size_after: ea.len(),
                common: before.iter().zip(&after).filter(|(x, y)| **x && **y).count(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub n: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub mode: NoiseMode,
    /// `E[f(η) f(η^ε)] − E[f(η)]²` with a block-jackknife interval.
    pub covariance: Estimate,
    pub crossing: Estimate,
    pub size_before: Estimate,
    pub size_after: Estimate,
    pub common: Estimate,
    #[serde(skip)]
    pub records: Vec<PairRecord>,
}

/// Plug-in covariance of the crossing indicator before and after noise.
///
/// The stationary mean `E[f(η)]` is estimated from both coordinates, since
/// `η^ε` has the law of `η`.
pub fn noise_covariance(
    n: f64,
    lambda: f64,
    epsilon: f64,
    replicates: usize,
    mode: NoiseMode,
    stream: RngStream,
) -> Result<CovarianceEstimate> {
    check_positive("lambda", lambda)?;
    check_probability("epsilon", epsilon)?;
    if let NoiseMode::TwoStage { p } = mode {
        check_positive("p", p)?;
        epsilon_prime(epsilon, p)?;
    }
    check_replicates(replicates)?;
    let (rect, region) = boxes(n)?;
    let records = par_replicates(replicates, |i| {
        noisy_pair_record(&rect, region, lambda, epsilon, mode, stream.replicate(i))
    })?;
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (f64::from(u8::from(r.before)), f64::from(u8::from(r.after))))
        .collect();
    let covariance = block_jackknife(&pairs, JACKKNIFE_BLOCKS, stationary_covariance);
    let col = |f: &dyn Fn(&PairRecord) -> f64| mean_estimate(&records.iter().map(f).collect::<Vec<_>>());
    Ok(CovarianceEstimate {
        n,
        lambda,
        epsilon,
        mode,
        covariance,
        crossing: col(&|r| f64::from(u8::from(r.before))),
        size_before: col(&|r| r.size_before as f64),
        size_after: col(&|r| r.size_after as f64),
        common: col(&|r| r.common as f64),
        records,
    })
}

/// `mean(xy) − m²` with `m` the mean over both coordinates.
pub fn stationary_covariance(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (sx, sy, sxy) = pairs
        .iter()
        .fold((0.0, 0.0, 0.0), |(a, b, c), &(x, y)| (a + x, b + y, c + x * y));
    let m = (sx + sy) / (2.0 * n);
    sxy / n - m * m
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceAcrossB {
    pub n: f64,
    pub p: f64,
    pub lambda: f64,
    /// Between-`B` variance of `P^B_p(H)` after subtracting the inner noise.
    pub variance: Estimate,
    /// Uncorrected between-`B` sample variance of the inner estimates.
    pub raw_variance: f64,
    pub mean_probability: Estimate,
    pub outer: usize,
    pub inner: usize,
}

/// `Var_{λ/p}(P^B_p(H(η, R_N, •)))` by nested Monte Carlo.
///
/// Each inner estimate `P̂_B` has conditional variance `P_B(1−P_B)/inner`,
/// estimated without bias by `P̂_B(1−P̂_B)/(inner−1)`; the mean of that term
/// is subtracted from the between-`B` sample variance.
pub fn variance_across_b(
    n: f64,
    p: f64,
    lambda: f64,
    outer: usize,
    inner: usize,
    stream: RngStream,
) -> Result<VarianceAcrossB> {
    check_positive("lambda", lambda)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1], got {p}")));
    }
    if outer < 2 || inner < 2 {
        return Err(Error::invalid("need at least 2 outer and 2 inner replicates"));
    }
    let (rect, region) = boxes(n)?;
    let estimates = par_replicates(outer, |i| {
        let s = stream.replicate(i);
        let b = sample_poisson_with(region, lambda / p, &mut s.child(0).rng())?;
        let mut rng = s.child(1).rng();
        let hits = (0..inner)
            .filter(|_| {
                let mask = bernoulli_mask(b.len(), p, &mut rng);
                let eta: Vec<Point> = b.iter().zip(&mask).filter(|(_, &m)| m).map(|(&x, _)| x).collect();
                occupied_horizontal_crossing(&eta, &rect)
            })
            .count();
        Ok(hits as f64 / inner as f64)
    })?;
    let corrected = |xs: &[f64]| {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let between = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
        let noise = xs.iter().map(|x| x * (1.0 - x)).sum::<f64>() / k / (inner as f64 - 1.0);
        between - noise
    };
    let raw = {
        let k = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / k;
        estimates.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)
    };
    Ok(VarianceAcrossB {
        n,
        p,
        lambda,
        variance: block_jackknife(&estimates, JACKKNIFE_BLOCKS, corrected),
        raw_variance: raw,
        mean_probability: mean_estimate(&estimates),
        outer,
        inner,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub n: f64,
    pub epsilon: f64,
    pub covariance: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub alpha: f64,
    /// The last covariance interval reaches below half the first estimate.
    pub consistent_with_decay: bool,
}

/// Continuum covariance along `N_grid` with `ε = N^{−α}`, for each `α`.
pub fn ns_exponent_sweep(
    alphas: &[f64],
    n_grid: &[f64],
    lambda: f64,
    replicates: usize,
    stream: RngStream,
) -> Result<(Vec<SweepRow>, Vec<SweepSummary>)> {
    if alphas.is_empty() || n_grid.is_empty() {
        return Err(Error::invalid("alpha and N grids must be non-empty"));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (a, &alpha) in alphas.iter().enumerate() {
        let mut cov = Vec::new();
        for (k, &n) in n_grid.iter().enumerate() {
            let epsilon = n.powf(-alpha).min(1.0);
            let s = stream.child(a as u64).child(k as u64);
            let est = noise_covariance(n, lambda, epsilon, replicates, NoiseMode::Continuum, s)?;
            cov.push(est.covariance);
            rows.push(SweepRow {
                alpha,
                n,
                epsilon,
                covariance: est.covariance,
            });
        }
        let (first, last) = (cov[0], cov[cov.len() - 1]);
        summary.push(SweepSummary {
            alpha,
            consistent_with_decay: last.ci_low < 0.5 * first.estimate,
        });
    }
    Ok((rows, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RevealmentRow {
    pub n: f64,
    pub seed_index: u64,
    pub b_points: usize,
    pub region_points: usize,
    pub max_revealment: f64,
}

/// For each `N` and each of `seeds` independent `B ~ Poisson(b_intensity)`
/// on `R_{N+2}`, the maximum estimated revealment over `B ∩ K^R`.
pub fn revealment_scan(
    n_grid: &[f64],
    p: f64,
    b_intensity: f64,
    replicates: usize,
    seeds: usize,
    stream: RngStream,
) -> Result<Vec<RevealmentRow>> {
    check_positive("B intensity", b_intensity)?;
    check_replicates(replicates)?;
    let mut rows = Vec::new();
    for (k, &n) in n_grid.iter().enumerate() {
        let (_, region) = boxes(n)?;
        for s in 0..seeds as u64 {
            let st = stream.child(k as u64).replicate(s);
            let b = PointSet::new(sample_poisson_with(region, b_intensity, &mut st.child(0).rng())?, region);
            let est = revealment_estimate(&b, p, n, RevealmentRegion::Right, replicates, st.child(1))?;
            rows.push(RevealmentRow {
                n,
                seed_index: s,
                b_points: b.len(),
                region_points: est.indices.len(),
                max_revealment: est.max,
            });
        }
    }
    Ok(rows)
}

/// Median of `max_revealment` for each `N`, in grid order.
pub fn revealment_medians(rows: &[RevealmentRow], n_grid: &[f64]) -> Vec<(f64, f64)> {
    n_grid
        .iter()
        .map(|&n| {
            let v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.max_revealment).collect();
            (n, median(&v))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneArmRow {
    pub ell: f64,
    pub seed_index: u64,
    pub probability: Estimate,
}

/// One-arm (inner-to-outer occupied connection) probabilities of the
/// annulus `A_ℓ` around the origin, for `B ~ Poisson(λ/p)` on the outer
/// square padded by 1.
pub fn one_arm_scan(
    ells: &[f64],
    p: f64,
    lambda: f64,
    replicates: usize,
    seeds: usize,
    stream: RngStream,
) -> Result<Vec<OneArmRow>> {
    check_positive("lambda", lambda)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1], got {p}")));
    }
    check_replicates(replicates)?;
    let mut rows = Vec::new();
    for (k, &ell) in ells.iter().enumerate() {
        check_positive("ell", ell)?;
        let region = Rect::square(4.0 * ell + 2.0)?;
        for s in 0..seeds as u64 {
            let st = stream.child(k as u64).replicate(s);
            let b = PointSet::new(sample_poisson_with(region, lambda / p, &mut st.child(0).rng())?, region);
            let prob = one_arm_probability(&b, p, Point::new(0.0, 0.0), ell, replicates, st.child(1))?;
            rows.push(OneArmRow {
                ell,
                seed_index: s,
                probability: proportion((prob * replicates as f64).round() as usize, replicates),
            });
        }
    }
    Ok(rows)
}

/// Plain covariance of paired indicators; kept for callers that do not
/// assume stationarity.
pub fn paired_covariance(records: &[PairRecord]) -> Estimate {
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (f64::from(u8::from(r.before)), f64::from(u8::from(r.after))))
        .collect();
    block_jackknife(&pairs, JACKKNIFE_BLOCKS, plug_in_covariance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_bracket_failure_is_reported() {
        let s = RngStream::new(5, 0);
        let err = estimate_lambda_c(6.0, 50, (2.0, 3.0), 0.01, s).unwrap_err();
        assert!(matches!(err, Error::SearchFailure(_)));
    }

    #[test]
    fn thresholds_agree_with_direct_crossings() {
        // At intensity λ the marked configuration restricted to u ≤ λ/λ_max is
        // Poisson(λ); check the indicator against a direct run on that subset.
        let (rect, region) = boxes(6.0).unwrap();
        let stream = RngStream::new(11, 0);
        let lambda_max = 1.2;
        let t = crossing_thresholds(6.0, lambda_max, 40, stream).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            let mut rng = stream.replicate(i as u64).rng();
            let pts = sample_poisson_with(region, lambda_max, &mut rng).unwrap();
            let marks: Vec<f64> = (0..pts.len()).map(|_| rng.random::<f64>()).collect();
            for lambda in [0.2, 0.4, 0.6, 0.9] {
                let sub: Vec<Point> = pts
                    .iter()
                    .zip(&marks)
                    .filter(|(_, &u)| u * lambda_max <= lambda)
                    .map(|(&x, _)| x)
                    .collect();
                assert_eq!(occupied_horizontal_crossing(&sub, &rect), ti <= lambda, "replicate {i} at {lambda}");
            }
        }
    }

    #[test]
    fn full_noise_decorrelates_and_no_noise_is_variance() {
        let s = RngStream::new(3, 0);
        let none = noise_covariance(6.0, 0.5, 0.0, 400, NoiseMode::Continuum, s).unwrap();
        let p = none.crossing.estimate;
        assert!((none.covariance.estimate - p * (1.0 - p)).abs() < 1e-12);
        let full = noise_covariance(6.0, 0.5, 1.0, 2000, NoiseMode::Continuum, s.child(1)).unwrap();
        assert!(full.covariance.contains(0.0), "{:?}", full.covariance);
    }

    #[test]
    fn inner_noise_correction_at_p_one() {
        // With p = 1 every inner draw equals the crossing bit of B, so the
        // within-B term vanishes and the estimate is the Bernoulli variance.
        let s = RngStream::new(9, 0);
        let v = variance_across_b(6.0, 1.0, 0.5, 200, 4, s).unwrap();
        let m = v.mean_probability.estimate;
        let bern = m * (1.0 - m) * 200.0 / 199.0;
        assert!((v.variance.estimate - bern).abs() < 1e-12);
    }
}
