//! Monte Carlo sampling of the measurement-driven engine cycle.
//!
//! Each cycle measures the coupled ground state `|0(λ)⟩` in the local basis.
//! Outcome `n` has probability `|⟨n(0)|0(λ)⟩|²`, after which the extracted
//! work is `E_n(0) − E₀(0)` and the measurement-injected heat is
//! `E_n(0) − E₀(λ)`. Switching, extraction and relaxation steps are ideal and
//! only bookkept.
//!
//! Samples are drawn in fixed blocks of [`BLOCK_SIZE`]; block `b` uses a
//! ChaCha20 stream `b` of the master seed. Statistics are computed from the
//! merged outcome histogram, so results do not depend on the thread count.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::eigensolve::GroundSolution;
use crate::model::OperatorPair;

/// Samples per PRNG stream.
pub const BLOCK_SIZE: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CycleError {
    #[error("outcome probabilities sum to {0}, not 1")]
    Unnormalized(f64),
    #[error("vector length {vector} does not match operator dimension {dim}")]
    DimensionMismatch { vector: usize, dim: usize },
    #[error("need at least one sample")]
    NoSamples,
}

/// One simulated cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSample {
    pub outcome: usize,
    pub work: f64,
    pub heat: f64,
}

/// Inverse-CDF sampler over the outcomes with nonzero probability.
#[derive(Debug, Clone)]
pub struct CycleSampler {
    outcomes: Vec<usize>,
    cdf: Vec<f64>,
    local_ground: f64,
    coupled_ground: f64,
    energies: Vec<f64>,
}

impl CycleSampler {
    pub fn new(ground: &GroundSolution, ops: &OperatorPair) -> Result<Self, CycleError> {
        let p = exact_outcome_distribution(ground, ops)?;
        let mut outcomes = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for (n, &pn) in p.iter().enumerate() {
            if pn > 0.0 {
                acc += pn;
                outcomes.push(n);
                cdf.push(acc);
            }
        }
        Ok(Self {
            outcomes,
            cdf,
            local_ground: ops.local_ground_energy(),
            coupled_ground: ground.energy,
            energies: ops.h_loc().to_vec(),
        })
    }

    /// Work and heat for a given outcome.
    pub fn energetics(&self, outcome: usize) -> CycleSample {
        let e = self.energies[outcome];
        CycleSample { outcome, work: e - self.local_ground, heat: e - self.coupled_ground }
    }

    pub fn draw_outcome(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cdf.last().expect("at least one outcome");
        let u = rng.random::<f64>() * total;
        let k = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.outcomes[k]
    }

    pub fn sample(&self, rng: &mut impl Rng) -> CycleSample {
        self.energetics(self.draw_outcome(rng))
    }
}

/// One cycle drawn from `rng`.
pub fn sample_cycle(ground: &GroundSolution, ops: &OperatorPair, rng: &mut impl Rng) -> Result<CycleSample, CycleError> {
    Ok(CycleSampler::new(ground, ops)?.sample(rng))
}

/// `p_n = |⟨n(0)|0(λ)⟩|²` for every local basis state.
pub fn exact_outcome_distribution(ground: &GroundSolution, ops: &OperatorPair) -> Result<Vec<f64>, CycleError> {
    if ground.vector.len() != ops.dim() {
        return Err(CycleError::DimensionMismatch { vector: ground.vector.len(), dim: ops.dim() });
    }
    let p: Vec<f64> = ground.vector.iter().map(|x| x * x).collect();
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(CycleError::Unnormalized(total));
    }
    Ok(p)
}

/// Monte Carlo summary of many cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleStats {
    pub n_samples: u64,
    pub mean_work: f64,
    /// Unbiased sample variance; zero for a single sample.
    pub var_work: f64,
    /// Standard error of `var_work`, `√((m₄ − s⁴)/N)`.
    pub se_var_work: f64,
    pub mean_heat: f64,
    pub var_heat: f64,
    pub se_work: f64,
    pub se_heat: f64,
    /// Outcome index → count.
    pub histogram: BTreeMap<usize, u64>,
    pub seed: u64,
}

struct Moments {
    mean: f64,
    var: f64,
    m4: f64,
}

fn moments(hist: &BTreeMap<usize, u64>, n: u64, value: impl Fn(usize) -> f64) -> Moments {
    let nf = n as f64;
    let mean = hist.iter().map(|(&k, &c)| c as f64 * value(k)).sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for (&k, &c) in hist {
        let d = value(k) - mean;
        m2 += c as f64 * d * d;
        m4 += c as f64 * d * d * d * d;
    }
    let var = if n > 1 { m2 / (nf - 1.0) } else { 0.0 };
    Moments { mean, var, m4: m4 / nf }
}

/// `n_samples` independent cycles, deterministic in `seed`.
pub fn run_cycles(ground: &GroundSolution, ops: &OperatorPair, n_samples: u64, seed: u64) -> Result<CycleStats, CycleError> {
    if n_samples == 0 {
        return Err(CycleError::NoSamples);
    }
    let sampler = CycleSampler::new(ground, ops)?;
    let blocks = n_samples.div_ceil(BLOCK_SIZE);
    let histogram = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK_SIZE.min(n_samples - b * BLOCK_SIZE);
            let mut h = BTreeMap::new();
            for _ in 0..count {
                *h.entry(sampler.draw_outcome(&mut rng)).or_insert(0u64) += 1;
            }
            h
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        });
    let w = moments(&histogram, n_samples, |k| sampler.energetics(k).work);
    let q = moments(&histogram, n_samples, |k| sampler.energetics(k).heat);
    let nf = n_samples as f64;
    Ok(CycleStats {
        n_samples,
        mean_work: w.mean,
        var_work: w.var,
        se_var_work: ((w.m4 - w.var * w.var).max(0.0) / nf).sqrt(),
        mean_heat: q.mean,
        var_heat: q.var,
        se_work: (w.var / nf).sqrt(),
        se_heat: (q.var / nf).sqrt(),
        histogram,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub passes: bool,
}

/// Pearson goodness-of-fit of the histogram against `probabilities`.
///
/// Outcomes with expected count below 5 are pooled into one bin. An observed
/// outcome of zero probability fails the test outright.
pub fn chi_square_test(stats: &CycleStats, probabilities: &[f64], confidence: f64) -> ChiSquareTest {
    let n = stats.n_samples as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    let mut impossible = false;
    for (k, &p) in probabilities.iter().enumerate() {
        let observed = stats.histogram.get(&k).copied().unwrap_or(0) as f64;
        if p <= 0.0 {
            impossible |= observed > 0.0;
            continue;
        }
        let expected = n * p;
        if expected < 5.0 {
            pooled.0 += observed;
            pooled.1 += expected;
        } else {
            bins.push((observed, expected));
        }
    }
    if pooled.1 > 0.0 {
        bins.push(pooled);
    }
    let statistic = if impossible {
        f64::INFINITY
    } else {
        bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum()
    };
    let dof = bins.len().saturating_sub(1);
    let critical = if dof == 0 {
        0.0
    } else {
        ChiSquared::new(dof as f64).expect("positive dof").inverse_cdf(confidence)
    };
    ChiSquareTest { statistic, dof, critical, passes: statistic <= critical }
}
