//! Ground-truth benefit computation on tiny instances by enumerating all
//! live-edge graphs, plus a forward Monte Carlo simulator. Test anchor only:
//! exact evaluation is #P-hard, so everything here carries hard size guards.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::stream_rng;

pub const MAX_ORACLE_EDGES: usize = 25;
pub const MAX_ORACLE_NODES: usize = 15;

/// Exact expected benefit of `seeds` by summing over all 2^m live-edge graphs.
pub fn exact_benefit(g: &Graph, seeds: &[u32]) -> Result<f64> {
    let m = g.m();
    if m > MAX_ORACLE_EDGES {
        return Err(Error::TooLarge(format!(
            "exact_benefit enumerates 2^m live-edge graphs; m={m} exceeds {MAX_ORACLE_EDGES}"
        )));
    }
    if seeds.is_empty() {
        return Ok(0.0);
    }
    let edges = g.edges();
    let mut total = 0.0;
    for mask in 0u64..(1u64 << m) {
        let mut prob = 1.0;
        for (i, &(_, _, p)) in edges.iter().enumerate() {
            prob *= if mask >> i & 1 == 1 { p } else { 1.0 - p };
        }
        total += prob * reachable_benefit(g, seeds, mask);
    }
    Ok(total)
}

/// Total benefit of nodes reachable from `seeds` using only live edges.
fn reachable_benefit(g: &Graph, seeds: &[u32], live_mask: u64) -> f64 {
    let mut reached = vec![false; g.n()];
    let mut queue: Vec<u32> = Vec::new();
    let mut benefit = 0.0;
    for &s in seeds {
        if !reached[s as usize] {
            reached[s as usize] = true;
            benefit += g.benefit(s);
            queue.push(s);
        }
    }
    while let Some(u) = queue.pop() {
        for (i, &(src, dst, _)) in g.edges().iter().enumerate() {
            if src == u && live_mask >> i & 1 == 1 && !reached[dst as usize] {
                reached[dst as usize] = true;
                benefit += g.benefit(dst);
                queue.push(dst);
            }
        }
    }
    benefit
}

/// Forward IC simulation: each newly activated node gets one Bernoulli
/// attempt per inactive out-neighbor. Trial `i` draws from its own RNG
/// stream, so results do not depend on execution order.
pub fn monte_carlo_benefit(g: &Graph, seeds: &[u32], trials: u64, seed: u64) -> (f64, f64) {
    assert!(trials >= 1);
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let b = simulate_once(g, seeds, &mut stream_rng(seed, trial));
            (b, b * b)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mean = sum / trials as f64;
    let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
    let stderr = (var / trials as f64).sqrt();
    (mean, stderr)
}

fn simulate_once<R: Rng>(g: &Graph, seeds: &[u32], rng: &mut R) -> f64 {
    let mut active = vec![false; g.n()];
    let mut frontier: Vec<u32> = Vec::new();
    let mut benefit = 0.0;
    for &s in seeds {
        if !active[s as usize] {
            active[s as usize] = true;
            benefit += g.benefit(s);
            frontier.push(s);
        }
    }
    let mut next: Vec<u32> = Vec::new();
    while !frontier.is_empty() {
        for &u in &frontier {
            for &(v, p) in g.out_adj(u) {
                if !active[v as usize] && rng.gen::<f64>() < p {
                    active[v as usize] = true;
                    benefit += g.benefit(v);
                    next.push(v);
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    benefit
}

/// Exhaustive search for the feasible subset maximizing `exact_benefit`.
/// Ties break toward the lexicographically smallest node list.
pub fn exact_opt(g: &Graph, budget: f64) -> Result<(Vec<u32>, f64)> {
    if g.n() > MAX_ORACLE_NODES || g.m() > MAX_ORACLE_EDGES {
        return Err(Error::TooLarge(format!(
            "exact_opt enumerates all subsets; n={} m={} exceeds n<={MAX_ORACLE_NODES}, m<={MAX_ORACLE_EDGES}",
            g.n(),
            g.m()
        )));
    }
    let n = g.n();
    let mut best: Vec<u32> = Vec::new();
    let mut best_val = 0.0;
    for mask in 0u32..(1u32 << n) {
        let set: Vec<u32> = (0..n as u32).filter(|&u| mask >> u & 1 == 1).collect();
        if g.total_cost(&set) > budget {
            continue;
        }
        let val = exact_benefit(g, &set)?;
        if val > best_val || (val == best_val && lex_less(&set, &best)) {
            best_val = val;
            best = set;
        }
    }
    Ok((best, best_val))
}

fn lex_less(a: &[u32], b: &[u32]) -> bool {
    // Both inputs are sorted ascending by construction.
    a < b
}
