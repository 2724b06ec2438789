//! Benefit estimation over sample pools and the per-seed-set constants used
//! by the concentration bounds.

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphConstants};
use crate::sampling::{BenefitSample, SampleKind, SamplePool};

/// Range and variance-proxy constants of the per-sample estimator for a
/// specific seed set S.
#[derive(Debug, Clone, Copy)]
pub struct SeedStats {
    /// sum over S of (1 - gamma(v)) b(v) / Gamma: the analytic singleton mass.
    pub mu_min: f64,
    /// Phi/Gamma + mu_min.
    pub mu_max: f64,
    /// mu_max - mu_min = Phi/Gamma, independent of S.
    pub rho: f64,
    /// min{rho, (sqrt(mu_max) - sqrt(mu_min))^2}.
    pub p: f64,
}

pub fn seed_stats(seeds: &[u32], g: &Graph, consts: &GraphConstants) -> SeedStats {
    let mu_min: f64 = seeds
        .iter()
        .map(|&v| (1.0 - consts.gamma[v as usize]) * g.benefit(v))
        .sum::<f64>()
        / consts.big_gamma;
    let rho = consts.rho;
    let mu_max = rho + mu_min;
    let bernstein = (mu_max.sqrt() - mu_min.sqrt()).powi(2);
    SeedStats {
        mu_min,
        mu_max,
        rho,
        p: rho.min(bernstein),
    }
}

/// 1 iff S intersects the sample. `seeds` must be sorted ascending.
pub fn coverage(sample: &BenefitSample, seeds: &[u32]) -> u32 {
    debug_assert!(seeds.windows(2).all(|w| w[0] < w[1]));
    sample
        .nodes
        .iter()
        .any(|u| seeds.binary_search(u).is_ok()) as u32
}

/// Per-sample estimator value: (Phi/Gamma) * coverage + mu_min.
pub fn z_value(
    sample: &BenefitSample,
    seeds: &[u32],
    consts: &GraphConstants,
    stats: &SeedStats,
) -> f64 {
    assert!(sample.importance, "z_value requires an importance sample");
    consts.rho * coverage(sample, seeds) as f64 + stats.mu_min
}

/// Number of distinct pool samples intersecting `seeds`, via the inverted
/// coverage index.
pub fn covered_count(pool: &SamplePool, seeds: &[u32]) -> usize {
    let mut hit = vec![false; pool.len()];
    let mut count = 0;
    for &v in seeds {
        for &idx in pool.covering(v) {
            if !hit[idx as usize] {
                hit[idx as usize] = true;
                count += 1;
            }
        }
    }
    count
}

/// Estimate over importance samples:
/// `(Phi/|R|) * covered + sum over S of (1 - gamma(v)) b(v)`.
pub fn estimate_benefit(
    pool: &SamplePool,
    seeds: &[u32],
    g: &Graph,
    consts: &GraphConstants,
) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::domain("cannot estimate over an empty pool"));
    }
    assert!(pool.kind() == SampleKind::Importance);
    let covered = covered_count(pool, seeds) as f64;
    let additive: f64 = seeds
        .iter()
        .map(|&v| (1.0 - consts.gamma[v as usize]) * g.benefit(v))
        .sum();
    Ok(consts.phi * covered / pool.len() as f64 + additive)
}

/// Estimate over plain benefit samples: `(Gamma/|R|) * covered`.
pub fn estimate_benefit_plain(
    pool: &SamplePool,
    seeds: &[u32],
    consts: &GraphConstants,
) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::domain("cannot estimate over an empty pool"));
    }
    assert!(pool.kind() == SampleKind::Plain);
    let covered = covered_count(pool, seeds) as f64;
    Ok(consts.big_gamma * covered / pool.len() as f64)
}
