//! Estimators with standard errors and confidence intervals.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A point estimate with its standard error and a 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: usize,
}

impl Estimate {
    pub fn normal(estimate: f64, stderr: f64, replicates: usize) -> Self {
        Estimate {
            estimate,
            stderr,
            ci_low: estimate - Z95 * stderr,
            ci_high: estimate + Z95 * stderr,
            replicates,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    /// Whether the two intervals overlap.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }

    /// `|a − b| ≤ 1.96·√(se_a² + se_b²)`.
    pub fn agrees_with(&self, other: &Estimate) -> bool {
        (self.estimate - other.estimate).abs() <= Z95 * self.stderr.hypot(other.stderr)
    }
}

/// Sample mean with the usual `s/√n` standard error.
pub fn mean_estimate(values: &[f64]) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate::normal(f64::NAN, f64::NAN, 0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Estimate::normal(mean, (var / n as f64).sqrt(), n)
}

/// Frequency of `true` with the binomial standard error.
pub fn proportion(hits: usize, trials: usize) -> Estimate {
    let p = hits as f64 / trials as f64;
    Estimate::normal(p, (p * (1.0 - p) / trials as f64).sqrt(), trials)
}

/// Plug-in covariance `mean(xy) − mean(x)·mean(y)`.
pub fn plug_in_covariance(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (sx, sy, sxy) = pairs
        .iter()
        .fold((0.0, 0.0, 0.0), |(a, b, c), &(x, y)| (a + x, b + y, c + x * y));
    sxy / n - (sx / n) * (sy / n)
}

/// Delete-one-block jackknife over `blocks` contiguous blocks.
///
/// Replicates are assigned to blocks in index order, so the result does not
/// depend on how they were computed.
pub fn block_jackknife<T>(data: &[T], blocks: usize, stat: impl Fn(&[T]) -> f64) -> Estimate
where
    T: Clone,
{
    let n = data.len();
    let full = stat(data);
    let g = blocks.min(n);
    if g < 2 {
        return Estimate::normal(full, f64::NAN, n);
    }
    let bounds: Vec<usize> = (0..=g).map(|k| k * n / g).collect();
    let leave_out: Vec<f64> = (0..g)
        .map(|k| {
            let mut rest = Vec::with_capacity(n);
            rest.extend_from_slice(&data[..bounds[k]]);
            rest.extend_from_slice(&data[bounds[k + 1]..]);
            stat(&rest)
        })
        .collect();
    let mean = leave_out.iter().sum::<f64>() / g as f64;
    let var = (g - 1) as f64 / g as f64 * leave_out.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    Estimate::normal(full, var.sqrt(), n)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Asymptotic critical value `c(α)·√((n+m)/(nm))` of the two-sample test.
pub fn ks_critical(alpha_coefficient: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    alpha_coefficient * ((n + m) / (n * m)).sqrt()
}

/// `c(α)` for `α = 0.01`.
pub const KS_C_001: f64 = 1.628;

/// Pearson statistic for counts against expected counts.
pub fn chi_square(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum()
}

/// Upper tail `P(χ²_k ≥ x)`.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(dof).map(|d| d.sf(x)).unwrap_or(f64::NAN)
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_proportion() {
        let e = mean_estimate(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.estimate, 2.5);
        assert!((e.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let p = proportion(30, 100);
        assert!((p.stderr - (0.21f64 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jackknife_of_mean_matches_classical_stderr() {
        let data: Vec<f64> = (0..40).map(|i| ((i * 7919) % 13) as f64).collect();
        let jk = block_jackknife(&data, 40, |d| d.iter().sum::<f64>() / d.len() as f64);
        let classic = mean_estimate(&data);
        assert!((jk.stderr - classic.stderr).abs() < 1e-12);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_statistic(&a, &a), 0.0);
        assert_eq!(ks_statistic(&a, &[10.0, 11.0]), 1.0);
    }

    #[test]
    fn chi_square_tail() {
        assert!((chi_square_sf(3.841_458_820_694_124, 1.0) - 0.05).abs() < 1e-9);
    }
}
