//! Comparison algorithms: a fixed-sample-count greedy over plain benefit
//! samples, plus the Random and Degree heuristics.

use rand::seq::SliceRandom;

use crate::bmc::{iga, IgaMode, SeedSet};
use crate::bounds::{alpha, beta, lopt, BoundParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphConstants};
use crate::rng::stream_rng;
use crate::sampling::{SampleKind, SamplePool, Sampler};

pub struct BaselineOutcome {
    pub seed_set: SeedSet,
    pub samples_generated: usize,
    pub sampling_ms: f64,
    pub selection_ms: f64,
}

/// Static pool size for the fixed-sample baseline: the worst-case sample
/// count at confidence delta with OPT replaced by its lower bound. Pinning
/// the count up front isolates the sampling-distribution difference from the
/// adaptive stopping rule.
pub fn bct_default_count(
    g: &Graph,
    consts: &GraphConstants,
    budget: f64,
    eps: f64,
    delta: f64,
) -> Result<u64> {
    let opt_lb = lopt(g, budget);
    if opt_lb <= 0.0 {
        return Err(Error::domain(
            "degenerate instance: no feasible seed set carries benefit",
        ));
    }
    let params = BoundParams::new(g, budget, eps, delta)?;
    let ab = alpha(delta)? + beta(delta, &params)?;
    let raw = 2.0 * consts.rho * consts.big_gamma * ab * ab / (eps * eps * opt_lb);
    Ok(raw.ceil() as u64)
}

/// Greedy over a fixed number of plain benefit samples.
pub fn run_bct_fixed(
    g: &Graph,
    consts: &GraphConstants,
    budget: f64,
    eps: f64,
    delta: f64,
    sample_count: Option<u64>,
    seed: u64,
) -> Result<BaselineOutcome> {
    if consts.phi == 0.0 {
        // Same degenerate shape as the adaptive algorithm: coverage carries
        // nothing, the additive term is exact.
        let start = std::time::Instant::now();
        let pool = SamplePool::new(SampleKind::Importance, seed, g.n());
        let seed_set = iga(&pool, g, consts, budget, IgaMode::Lazy)?;
        return Ok(BaselineOutcome {
            seed_set,
            samples_generated: 0,
            sampling_ms: 0.0,
            selection_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let count = match sample_count {
        Some(0) => return Err(Error::domain("sample_count must be positive")),
        Some(c) => c,
        None => bct_default_count(g, consts, budget, eps, delta)?,
    };
    let sampler = Sampler::new(g, consts);
    let mut pool = SamplePool::new(SampleKind::Plain, seed, g.n());
    let clock = std::time::Instant::now();
    pool.extend(g, consts, &sampler, count as usize)?;
    let sampling_ms = clock.elapsed().as_secs_f64() * 1e3;
    let clock = std::time::Instant::now();
    let seed_set = iga(&pool, g, consts, budget, IgaMode::Lazy)?;
    Ok(BaselineOutcome {
        seed_set,
        samples_generated: pool.len(),
        sampling_ms,
        selection_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}

/// Uniform shuffle; add nodes while they fit the budget.
pub fn run_random(g: &Graph, budget: f64, seed: u64) -> SeedSet {
    let mut order: Vec<u32> = (0..g.n() as u32).collect();
    order.shuffle(&mut stream_rng(seed, 2));
    fill_budget(g, budget, order)
}

/// Descending out-degree (ties by id); add nodes while they fit.
pub fn run_degree(g: &Graph, budget: f64) -> SeedSet {
    let mut order: Vec<u32> = (0..g.n() as u32).collect();
    order.sort_by(|&a, &b| g.out_degree(b).cmp(&g.out_degree(a)).then(a.cmp(&b)));
    fill_budget(g, budget, order)
}

fn fill_budget(g: &Graph, budget: f64, order: Vec<u32>) -> SeedSet {
    let mut nodes = Vec::new();
    let mut spent = 0.0;
    for u in order {
        if spent + g.cost(u) <= budget {
            spent += g.cost(u);
            nodes.push(u);
        }
    }
    SeedSet {
        nodes,
        total_cost: spent,
        est_benefit: None,
    }
}
