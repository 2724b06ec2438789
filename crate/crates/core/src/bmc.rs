//! Budgeted maximum coverage over a sample pool: cost-ratio greedy compared
//! against the best feasible singleton. The coverage term is submodular and
//! the per-seed additive term is modular, so lazy (CELF-style) re-evaluation
//! of stale priority-queue entries is sound; a naive rescan mode is kept for
//! differential testing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::estimator::{estimate_benefit, estimate_benefit_plain};
use crate::graph::{Graph, GraphConstants};
use crate::sampling::{SampleKind, SamplePool};

/// Selected nodes in selection order, with their cost and pool estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    pub nodes: Vec<u32>,
    pub total_cost: f64,
    pub est_benefit: Option<f64>,
}

impl SeedSet {
    pub fn empty() -> SeedSet {
        SeedSet {
            nodes: Vec::new(),
            total_cost: 0.0,
            est_benefit: Some(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgaMode {
    Lazy,
    Naive,
}

struct Candidate {
    ratio: f64,
    gain: f64,
    node: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: ratio, then gain, then smaller node id.
        self.ratio
            .total_cmp(&other.ratio)
            .then(self.gain.total_cmp(&other.gain))
            .then(other.node.cmp(&self.node))
    }
}

struct Objective<'a> {
    pool: &'a SamplePool,
    /// Phi/|R| for importance pools, Gamma/|R| for plain pools.
    coverage_weight: f64,
    /// Per-node modular term; zero for plain pools.
    additive: Vec<f64>,
    covered: Vec<bool>,
}

impl<'a> Objective<'a> {
    fn new(pool: &'a SamplePool, g: &Graph, consts: &GraphConstants) -> Objective<'a> {
        let t = pool.len().max(1) as f64;
        let (coverage_weight, additive) = match pool.kind() {
            SampleKind::Importance => (
                consts.phi / t,
                (0..g.n())
                    .map(|u| (1.0 - consts.gamma[u]) * g.benefit(u as u32))
                    .collect(),
            ),
            SampleKind::Plain => (consts.big_gamma / t, vec![0.0; g.n()]),
        };
        Objective {
            pool,
            coverage_weight,
            additive,
            covered: vec![false; pool.len()],
        }
    }

    fn gain(&self, u: u32) -> f64 {
        let new = self
            .pool
            .covering(u)
            .iter()
            .filter(|&&idx| !self.covered[idx as usize])
            .count();
        self.coverage_weight * new as f64 + self.additive[u as usize]
    }

    fn select(&mut self, u: u32) {
        for &idx in self.pool.covering(u) {
            self.covered[idx as usize] = true;
        }
    }

    fn singleton_value(&self, u: u32) -> f64 {
        self.coverage_weight * self.pool.covering(u).len() as f64 + self.additive[u as usize]
    }
}

fn ratio_of(gain: f64, cost: f64) -> f64 {
    if cost == 0.0 {
        f64::INFINITY
    } else {
        gain / cost
    }
}

/// Ratio greedy with singleton fallback. Skipped nodes are never
/// reconsidered, and zero-gain candidates are dropped outright.
pub fn iga(
    pool: &SamplePool,
    g: &Graph,
    consts: &GraphConstants,
    budget: f64,
    mode: IgaMode,
) -> Result<SeedSet> {
    let mut obj = Objective::new(pool, g, consts);
    let nodes = match mode {
        IgaMode::Lazy => greedy_lazy(&mut obj, g, budget),
        IgaMode::Naive => greedy_naive(&mut obj, g, budget),
    };

    let singleton_obj = Objective::new(pool, g, consts);
    let best_single = (0..g.n() as u32)
        .filter(|&u| g.cost(u) <= budget)
        .max_by(|&a, &b| {
            singleton_obj
                .singleton_value(a)
                .total_cmp(&singleton_obj.singleton_value(b))
                .then(b.cmp(&a))
        });

    let estimate = |seeds: &[u32]| -> Result<f64> {
        if pool.is_empty() {
            // Degenerate pools only occur on instances where the coverage
            // term vanishes; the additive term is the whole objective.
            return Ok(seeds
                .iter()
                .map(|&u| singleton_obj.additive[u as usize])
                .sum());
        }
        match pool.kind() {
            SampleKind::Importance => estimate_benefit(pool, seeds, g, consts),
            SampleKind::Plain => estimate_benefit_plain(pool, seeds, consts),
        }
    };

    let greedy_est = estimate(&nodes)?;
    let (nodes, est) = match best_single {
        Some(v) => {
            let single_est = estimate(&[v])?;
            if single_est > greedy_est {
                (vec![v], single_est)
            } else {
                (nodes, greedy_est)
            }
        }
        None => (nodes, greedy_est),
    };
    let total_cost = g.total_cost(&nodes);
    debug_assert!(total_cost <= budget + 1e-9);
    Ok(SeedSet {
        nodes,
        total_cost,
        est_benefit: Some(est),
    })
}

fn greedy_lazy(obj: &mut Objective, g: &Graph, budget: f64) -> Vec<u32> {
    let mut heap: BinaryHeap<Candidate> = (0..g.n() as u32)
        .map(|u| {
            let gain = obj.gain(u);
            Candidate {
                ratio: ratio_of(gain, g.cost(u)),
                gain,
                node: u,
            }
        })
        .collect();
    let mut selected = Vec::new();
    let mut spent = 0.0;
    while let Some(top) = heap.pop() {
        let gain = obj.gain(top.node);
        // Coverage marginals only shrink as the selection grows.
        debug_assert!(gain <= top.gain + 1e-9);
        let fresh = Candidate {
            ratio: ratio_of(gain, g.cost(top.node)),
            gain,
            node: top.node,
        };
        if let Some(next) = heap.peek() {
            if fresh.cmp(next) == Ordering::Less {
                heap.push(fresh);
                continue;
            }
        }
        if gain <= 0.0 {
            continue;
        }
        if g.cost(top.node) <= budget - spent {
            spent += g.cost(top.node);
            obj.select(top.node);
            selected.push(top.node);
        }
        // Whether it fit or not, the node leaves the candidate set.
    }
    selected
}

fn greedy_naive(obj: &mut Objective, g: &Graph, budget: f64) -> Vec<u32> {
    let mut remaining: Vec<u32> = (0..g.n() as u32).collect();
    let mut selected = Vec::new();
    let mut spent = 0.0;
    while !remaining.is_empty() {
        let best = remaining
            .iter()
            .map(|&u| {
                let gain = obj.gain(u);
                Candidate {
                    ratio: ratio_of(gain, g.cost(u)),
                    gain,
                    node: u,
                }
            })
            .max()
            .unwrap();
        remaining.retain(|&u| u != best.node);
        if best.gain <= 0.0 {
            continue;
        }
        if g.cost(best.node) <= budget - spent {
            spent += g.cost(best.node);
            obj.select(best.node);
            selected.push(best.node);
        }
    }
    selected
}
