//! The main adaptive loop: exponentially growing importance-sample pool,
//! per-iteration greedy candidate, and a stopping rule that certifies the
//! approximation ratio from the lower/upper bound pair.

use serde::{Deserialize, Serialize};

use crate::bmc::{iga, IgaMode, SeedSet};
use crate::bounds::{approx_ratio, lopt, lower_bound, sample_bound, upper_bound, BoundParams};
use crate::error::{Error, Result};
use crate::estimator::seed_stats;
use crate::graph::{Graph, GraphConstants};
use crate::sampling::{SampleKind, SamplePool, Sampler};

#[derive(Debug, Clone)]
pub struct IvmConfig {
    pub eps: f64,
    pub delta: f64,
    pub budget: f64,
    pub master_seed: u64,
    /// Test hook: caps the worst-case pool size.
    pub max_pool_override: Option<u64>,
}

impl IvmConfig {
    pub fn new(eps: f64, delta: f64, budget: f64, master_seed: u64) -> Result<IvmConfig> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(format!("eps {eps} outside (0,1)")));
        }
        // The sample-count analysis assumes delta < 1/2.
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::domain(format!("delta {delta} outside (0, 1/2)")));
        }
        if !(budget > 0.0) {
            return Err(Error::domain(format!("budget {budget} must be positive")));
        }
        Ok(IvmConfig {
            eps,
            delta,
            budget,
            master_seed,
            max_pool_override: None,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationTrace {
    pub t: usize,
    pub pool_size: usize,
    pub candidate: Vec<u32>,
    pub b_hat: f64,
    pub f_l: f64,
    pub f_u: f64,
    pub ratio: f64,
    pub stopped: bool,
}

pub struct IvmOutcome {
    pub seed_set: SeedSet,
    pub trace: Vec<IterationTrace>,
    pub samples_generated: usize,
    pub n_max: u64,
    pub sampling_ms: f64,
    pub selection_ms: f64,
}

pub fn run_ivm(g: &Graph, consts: &GraphConstants, cfg: &IvmConfig) -> Result<IvmOutcome> {
    if consts.phi == 0.0 {
        // No node has both benefit and in-edges, so every benefit sample is a
        // singleton and B(S) is exactly the additive term. The greedy over an
        // empty pool optimizes precisely that.
        let start = std::time::Instant::now();
        let pool = SamplePool::new(SampleKind::Importance, cfg.master_seed, g.n());
        let seed_set = iga(&pool, g, consts, cfg.budget, IgaMode::Lazy)?;
        return Ok(IvmOutcome {
            seed_set,
            trace: Vec::new(),
            samples_generated: 0,
            n_max: 0,
            sampling_ms: 0.0,
            selection_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let opt_lb = lopt(g, cfg.budget);
    if opt_lb <= 0.0 {
        return Err(Error::domain(
            "degenerate instance: no feasible seed set carries benefit",
        ));
    }
    let params = BoundParams::new(g, cfg.budget, cfg.eps, cfg.delta)?;
    let mut n_max = sample_bound(&params, consts, opt_lb)?;
    if let Some(cap) = cfg.max_pool_override {
        n_max = n_max.min(cap);
    }
    let n1 = ((1.0 / (cfg.eps * cfg.eps)) * (1.0 / cfg.delta).ln()).ceil() as u64;
    let n1 = n1.clamp(1, n_max.max(1));
    let t_max = ((n_max as f64 / n1 as f64).log2().ceil() as usize).max(1);
    let delta_1 = cfg.delta / (3.0 * t_max as f64);
    let threshold = approx_ratio() - cfg.eps;

    let sampler = Sampler::new(g, consts);
    let mut pool = SamplePool::new(SampleKind::Importance, cfg.master_seed, g.n());
    let mut trace = Vec::new();
    let mut target = n1;
    let mut sampling_ms = 0.0;
    let mut selection_ms = 0.0;
    for t in 1.. {
        // Generation is capped at N_max so the final doubling cannot
        // overshoot the worst-case bound.
        let clock = std::time::Instant::now();
        pool.extend(g, consts, &sampler, target.min(n_max) as usize)?;
        sampling_ms += clock.elapsed().as_secs_f64() * 1e3;
        let clock = std::time::Instant::now();
        let candidate = iga(&pool, g, consts, cfg.budget, IgaMode::Lazy)?;
        selection_ms += clock.elapsed().as_secs_f64() * 1e3;
        let b_hat = candidate.est_benefit.unwrap_or(0.0);
        let stats = seed_stats(&candidate.nodes, g, consts);
        let f_l = lower_bound(pool.len(), delta_1, b_hat, &stats, consts);
        let f_u = upper_bound(pool.len(), delta_1, b_hat, &stats, consts);
        debug_assert!(f_l <= b_hat + 1e-9);
        debug_assert!(f_u >= b_hat / approx_ratio() - 1e-9);
        let ratio = if f_u > 0.0 { f_l / f_u } else { 0.0 };
        let stopped = ratio >= threshold || pool.len() as u64 >= n_max;
        trace.push(IterationTrace {
            t,
            pool_size: pool.len(),
            candidate: candidate.nodes.clone(),
            b_hat,
            f_l,
            f_u,
            ratio,
            stopped,
        });
        if stopped {
            let samples_generated = pool.len();
            return Ok(IvmOutcome {
                seed_set: candidate,
                trace,
                samples_generated,
                n_max,
                sampling_ms,
                selection_ms,
            });
        }
        target *= 2;
    }
    unreachable!()
}
