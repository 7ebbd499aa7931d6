//! Resampling noise on point configurations and on bit vectors.

use rand::Rng;
use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::sampling::{
    bernoulli_mask, p_subset_mask, sample_poisson_with, PointSet, Provenance, Rect, RngStream,
};

/// `η^ε` together with the number of points it shares with `η`.
///
/// The survivors come first in `after.points`, followed by the additions.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuumPerturbation {
    pub after: PointSet,
    pub survivors: usize,
}

/// Deletes each point with probability `ε`, then adds an independent
/// Poisson process of intensity `ελ` on `region`.
///
/// Survival decisions use sub-stream 0 and additions sub-stream 1.
pub fn continuum_perturb(
    eta: &PointSet,
    epsilon: f64,
    lambda: f64,
    region: Rect,
    stream: RngStream,
) -> Result<ContinuumPerturbation> {
    check_probability("epsilon", epsilon)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    let keep = p_subset_mask(eta.len(), 1.0 - epsilon, stream.child(0))?;
    let mut points = eta.select(&keep);
    let survivors = points.len();
    let mut rng = stream.child(1).rng();
    points.extend(sample_poisson_with(region, epsilon * lambda, &mut rng)?);
    Ok(ContinuumPerturbation {
        after: PointSet {
            points,
            region,
            provenance: Provenance::Perturbed { stream, epsilon },
        },
        survivors,
    })
}

/// Keeps each bit with probability `1 − ε` and otherwise redraws it from Bernoulli(p).
pub fn discrete_perturb(omega: &[bool], epsilon: f64, p: f64, stream: RngStream) -> Result<Vec<bool>> {
    check_probability("epsilon", epsilon)?;
    check_probability("p", p)?;
    let mut rng = stream.rng();
    Ok(perturb_bits(omega, epsilon, p, &mut rng))
}

pub(crate) fn perturb_bits<R: Rng + ?Sized>(omega: &[bool], epsilon: f64, p: f64, rng: &mut R) -> Vec<bool> {
    omega
        .iter()
        .map(|&bit| {
            if rng.random::<f64>() < epsilon {
                rng.random::<f64>() < p
            } else {
                bit
            }
        })
        .collect()
}

/// Per-point re-randomisation rate on `B` that reproduces continuum noise `ε`
/// on the `p`-subset: `ε′ = ε / (1 − p)`.
pub fn epsilon_prime(epsilon: f64, p: f64) -> Result<f64> {
    check_probability("epsilon", epsilon)?;
    check_probability("p", p)?;
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    if epsilon >= 1.0 - p {
        return Err(Error::invalid(format!(
            "epsilon {epsilon} must be below 1 - p = {}",
            1.0 - p
        )));
    }
    Ok(epsilon / (1.0 - p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoisyPair {
    pub before: PointSet,
    pub after: PointSet,
    pub epsilon: f64,
    /// Number of points present in both configurations.
    pub common: usize,
    pub coupling: RngStream,
}

/// `B`, a `p`-subset `η` of it, and `η^{ε′}` obtained by re-randomising each
/// point's membership with probability `ε′`; all as masks over `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStagePair {
    pub parent: PointSet,
    pub before: Vec<bool>,
    pub after: Vec<bool>,
    pub epsilon_prime: f64,
}

impl TwoStagePair {
    pub fn common(&self) -> usize {
        self.before.iter().zip(&self.after).filter(|(a, b)| **a && **b).count()
    }

    pub fn into_noisy_pair(self, epsilon: f64, coupling: RngStream) -> NoisyPair {
        let common = self.common();
        let region = self.parent.region;
        NoisyPair {
            before: PointSet::new(self.parent.select(&self.before), region),
            after: PointSet::new(self.parent.select(&self.after), region),
            epsilon,
            common,
            coupling,
        }
    }
}

pub fn two_stage_noisy_pair(
    lambda_c: f64,
    p: f64,
    epsilon: f64,
    region: Rect,
    stream: RngStream,
) -> Result<TwoStagePair> {
    let eps_b = epsilon_prime(epsilon, p)?;
    let ts = crate::sampling::two_stage_sample(lambda_c, p, region, stream.child(0))?;
    let mut rng = stream.child(1).rng();
    let after = perturb_bits(&ts.included, eps_b, p, &mut rng);
    Ok(TwoStagePair {
        parent: ts.parent,
        before: ts.included,
        after,
        epsilon_prime: eps_b,
    })
}

/// Continuum noise on `Poisson(λ_c)` and its two-stage realisation, from
/// independent sub-streams of `stream`.
pub fn coupled_pair_continuum_vs_two_stage(
    lambda_c: f64,
    p: f64,
    epsilon: f64,
    region: Rect,
    stream: RngStream,
) -> Result<(NoisyPair, NoisyPair)> {
    epsilon_prime(epsilon, p)?;
    let mut rng = stream.child(10).rng();
    let eta = PointSet {
        points: sample_poisson_with(region, lambda_c, &mut rng)?,
        region,
        provenance: Provenance::Poisson {
            stream: stream.child(10),
            intensity: lambda_c,
        },
    };
    let pert = continuum_perturb(&eta, epsilon, lambda_c, region, stream.child(11))?;
    let continuum = NoisyPair {
        before: eta,
        after: pert.after,
        epsilon,
        common: pert.survivors,
        coupling: stream,
    };
    let two_stage = two_stage_noisy_pair(lambda_c, p, epsilon, region, stream.child(12))?
        .into_noisy_pair(epsilon, stream);
    Ok((continuum, two_stage))
}

/// Single-bit transition matrix `K[a][b] = P(after = b | before = a)` of
/// [`discrete_perturb`].
pub fn bit_kernel(epsilon: f64, p: f64) -> [[f64; 2]; 2] {
    [
        [1.0 - epsilon * p, epsilon * p],
        [epsilon * (1.0 - p), 1.0 - epsilon * (1.0 - p)],
    ]
}

/// Draws `n` Bernoulli(p) bits; convenience for discrete experiments.
pub fn random_bits(n: usize, p: f64, stream: RngStream) -> Result<Vec<bool>> {
    check_probability("p", p)?;
    Ok(bernoulli_mask(n, p, &mut stream.rng()))
}
