//! Benefit sample generation: plain reverse reachability from a
//! benefit-weighted source, and the importance variant that conditions on the
//! sample containing at least two nodes. The singleton mass excluded here is
//! folded back in analytically by the estimator.

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphConstants};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Plain,
    Importance,
}

/// A reverse-reachable node set with its source. `nodes` always contains
/// `source`; importance samples contain at least two nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenefitSample {
    pub source: u32,
    pub nodes: Vec<u32>,
    pub importance: bool,
}

/// Source-distribution tables for one prepared graph.
pub struct Sampler {
    by_benefit: Option<AliasTable>,
    by_importance: Option<AliasTable>,
}

impl Sampler {
    pub fn new(g: &Graph, consts: &GraphConstants) -> Sampler {
        let importance_weights: Vec<f64> = (0..g.n())
            .map(|u| consts.gamma[u] * g.benefit(u as u32))
            .collect();
        Sampler {
            by_benefit: AliasTable::new(g.benefits()),
            by_importance: AliasTable::new(&importance_weights),
        }
    }
}

/// Reusable visited set with generation stamps; one per worker thread.
pub struct Scratch {
    stamp: Vec<u32>,
    generation: u32,
    queue: VecDeque<u32>,
}

impl Scratch {
    pub fn new(n: usize) -> Scratch {
        Scratch {
            stamp: vec![0; n],
            generation: 0,
            queue: VecDeque::new(),
        }
    }

    fn begin(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        self.queue.clear();
    }

    #[inline]
    fn visit(&mut self, u: u32) -> bool {
        let slot = &mut self.stamp[u as usize];
        if *slot == self.generation {
            false
        } else {
            *slot = self.generation;
            true
        }
    }
}

/// Plain benefit sample: source drawn with probability b(u)/Gamma, then
/// reverse live-edge exploration, flipping each in-edge at most once.
pub fn gen_benefit_sample(
    g: &Graph,
    consts: &GraphConstants,
    sampler: &Sampler,
    master_seed: u64,
    sample_index: u64,
    scratch: &mut Scratch,
) -> Result<BenefitSample> {
    let _ = consts;
    let table = sampler
        .by_benefit
        .as_ref()
        .ok_or_else(|| Error::domain("no benefit mass: Gamma = 0"))?;
    let mut rng = stream_rng(master_seed, sample_index);
    let source = table.sample(&mut rng) as u32;
    scratch.begin();
    scratch.visit(source);
    let mut nodes = vec![source];
    scratch.queue.push_back(source);
    reverse_bfs(g, scratch, &mut nodes, &mut rng);
    Ok(BenefitSample {
        source,
        nodes,
        importance: false,
    })
}

/// Importance benefit sample: source drawn with probability
/// gamma(u)b(u)/Phi, the first live in-neighbor index drawn from the
/// first-success decomposition of gamma(u), remaining in-neighbors flipped
/// independently, then standard reverse exploration.
pub fn gen_importance_sample(
    g: &Graph,
    consts: &GraphConstants,
    sampler: &Sampler,
    master_seed: u64,
    sample_index: u64,
    scratch: &mut Scratch,
) -> Result<BenefitSample> {
    let table = sampler
        .by_importance
        .as_ref()
        .ok_or_else(|| Error::domain("no importance mass: Phi = 0"))?;
    let mut rng = stream_rng(master_seed, sample_index);
    let source = table.sample(&mut rng) as u32;
    let in_list = g.in_adj(source);
    debug_assert!(!in_list.is_empty() && consts.gamma[source as usize] > 0.0);

    // Pr[first = v_i] = p_i * prod_{j<i}(1 - p_j), normalized by gamma(u).
    let r = rng.gen::<f64>() * consts.gamma[source as usize];
    let mut acc = 0.0;
    let mut surv = 1.0;
    let mut first = in_list.len() - 1;
    for (i, &(_, p)) in in_list.iter().enumerate() {
        acc += p * surv;
        if r < acc {
            first = i;
            break;
        }
        surv *= 1.0 - p;
    }

    scratch.begin();
    scratch.visit(source);
    let first_node = in_list[first].0;
    scratch.visit(first_node);
    let mut nodes = vec![source, first_node];
    scratch.queue.push_back(first_node);
    // In-neighbors before `first` are non-live by conditioning; the rest are
    // ordinary independent flips.
    for &(v, p) in &in_list[first + 1..] {
        if rng.gen::<f64>() < p && scratch.visit(v) {
            nodes.push(v);
            scratch.queue.push_back(v);
        }
    }
    reverse_bfs(g, scratch, &mut nodes, &mut rng);
    debug_assert!(nodes.len() >= 2);
    Ok(BenefitSample {
        source,
        nodes,
        importance: true,
    })
}

fn reverse_bfs<R: Rng>(g: &Graph, scratch: &mut Scratch, nodes: &mut Vec<u32>, rng: &mut R) {
    while let Some(v) = scratch.queue.pop_front() {
        for &(w, p) in g.in_adj(v) {
            if scratch.stamp[w as usize] == scratch.generation {
                continue;
            }
            if rng.gen::<f64>() < p {
                scratch.visit(w);
                nodes.push(w);
                scratch.queue.push_back(w);
            }
        }
    }
}

/// Append-only sample collection with an inverted node -> sample index.
/// Contents are a pure function of `(graph, kind, master_seed, len)`.
pub struct SamplePool {
    kind: SampleKind,
    master_seed: u64,
    samples: Vec<BenefitSample>,
    coverage: Vec<Vec<u32>>,
}

impl SamplePool {
    pub fn new(kind: SampleKind, master_seed: u64, n: usize) -> SamplePool {
        SamplePool {
            kind,
            master_seed,
            samples: Vec::new(),
            coverage: vec![Vec::new(); n],
        }
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[BenefitSample] {
        &self.samples
    }

    /// Indices of samples containing `v`.
    pub fn covering(&self, v: u32) -> &[u32] {
        &self.coverage[v as usize]
    }

    /// Grows the pool to exactly `target_count` samples. Generation is
    /// parallel; sample `i` depends only on `(master_seed, i)`, so the result
    /// is identical for any worker count.
    pub fn extend(
        &mut self,
        g: &Graph,
        consts: &GraphConstants,
        sampler: &Sampler,
        target_count: usize,
    ) -> Result<()> {
        if target_count < self.samples.len() {
            return Err(Error::domain("pool is append-only; cannot shrink"));
        }
        let start = self.samples.len();
        let kind = self.kind;
        let seed = self.master_seed;
        let batch: Result<Vec<BenefitSample>> = (start..target_count)
            .into_par_iter()
            .map_init(
                || Scratch::new(g.n()),
                |scratch, i| match kind {
                    SampleKind::Plain => {
                        gen_benefit_sample(g, consts, sampler, seed, i as u64, scratch)
                    }
                    SampleKind::Importance => {
                        gen_importance_sample(g, consts, sampler, seed, i as u64, scratch)
                    }
                },
            )
            .collect();
        for sample in batch? {
            let idx = self.samples.len() as u32;
            for &u in &sample.nodes {
                self.coverage[u as usize].push(idx);
            }
            self.samples.push(sample);
        }
        Ok(())
    }

    /// Debug dump: one sample per line, `source<TAB>sorted node ids`.
    pub fn dump(&self, mut w: impl Write) -> std::io::Result<()> {
        for sample in &self.samples {
            let mut nodes = sample.nodes.clone();
            nodes.sort_unstable();
            let ids: Vec<String> = nodes.iter().map(|u| u.to_string()).collect();
            writeln!(w, "{}\t{}", sample.source, ids.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn graph(edges: &[(u64, u64, f64)]) -> Graph {
        let triples: Vec<(u64, u64, Option<f64>)> =
            edges.iter().map(|&(u, v, p)| (u, v, Some(p))).collect();
        GraphBuilder::from_edges(&triples, true).unwrap().build().unwrap()
    }

    fn pool_of(g: &Graph, kind: SampleKind, seed: u64, count: usize) -> SamplePool {
        let consts = g.compute_constants();
        let sampler = Sampler::new(g, &consts);
        let mut pool = SamplePool::new(kind, seed, g.n());
        pool.extend(g, &consts, &sampler, count).unwrap();
        pool
    }

    #[test]
    fn degenerate_benefit_mass_pins_the_source() {
        let mut g = graph(&[(0, 1, 0.5), (1, 2, 0.5)]);
        g.set_benefits(vec![0.0, 1.0, 0.0]).unwrap();
        let pool = pool_of(&g, SampleKind::Plain, 7, 500);
        assert!(pool.samples().iter().all(|s| s.source == 1));
    }

    #[test]
    fn near_zero_probabilities_give_singletons() {
        let g = graph(&[(0, 1, 0.001), (2, 1, 0.001), (3, 2, 0.001)]);
        let pool = pool_of(&g, SampleKind::Plain, 11, 10_000);
        let singles = pool.samples().iter().filter(|s| s.nodes.len() == 1).count();
        assert!(singles as f64 / 10_000.0 >= 0.99, "{singles}");
    }

    #[test]
    fn single_edge_membership_frequency() {
        let g = graph(&[(0, 1, 0.5)]);
        let mut g = g;
        g.set_benefits(vec![0.0, 1.0]).unwrap(); // source is always node 1
        let pool = pool_of(&g, SampleKind::Plain, 3, 10_000);
        let with_parent = pool
            .samples()
            .iter()
            .filter(|s| s.nodes.contains(&0))
            .count() as f64
            / 10_000.0;
        assert!((with_parent - 0.5).abs() < 0.02, "{with_parent}");
    }

    #[test]
    fn first_in_neighbor_frequencies() {
        // Two in-neighbors with p = 0.5: Pr[first = v1] = 0.5 / 0.75 = 2/3.
        let g = graph(&[(1, 0, 0.5), (2, 0, 0.5)]);
        let mut g = g;
        g.set_benefits(vec![1.0, 0.0, 0.0]).unwrap();
        let pool = pool_of(&g, SampleKind::Importance, 13, 10_000);
        let first_is_v1 = pool
            .samples()
            .iter()
            .filter(|s| s.nodes[1] == 1)
            .count() as f64
            / 10_000.0;
        assert!((first_is_v1 - 2.0 / 3.0).abs() < 0.02, "{first_is_v1}");
    }

    #[test]
    fn importance_samples_have_at_least_two_nodes() {
        let g = graph(&[(0, 1, 0.2), (1, 2, 0.4), (2, 0, 0.3), (0, 2, 0.25)]);
        let pool = pool_of(&g, SampleKind::Importance, 5, 5000);
        for s in pool.samples() {
            assert!(s.nodes.len() >= 2);
            assert!(s.nodes.contains(&s.source));
            assert!(s.importance);
        }
    }

    #[test]
    fn importance_source_never_has_zero_gamma() {
        let g = graph(&[(0, 1, 0.3), (1, 2, 0.3)]);
        let consts = g.compute_constants();
        let pool = pool_of(&g, SampleKind::Importance, 21, 2000);
        for s in pool.samples() {
            assert!(consts.gamma[s.source as usize] > 0.0);
        }
    }

    #[test]
    fn phi_zero_is_an_error() {
        // Benefit only on a node with no in-edges.
        let mut g = graph(&[(0, 1, 0.5)]);
        g.set_benefits(vec![1.0, 0.0]).unwrap();
        let consts = g.compute_constants();
        assert_eq!(consts.phi, 0.0);
        let sampler = Sampler::new(&g, &consts);
        let mut pool = SamplePool::new(SampleKind::Importance, 1, g.n());
        assert!(pool.extend(&g, &consts, &sampler, 1).is_err());
    }

    #[test]
    fn extend_is_idempotent_at_same_size() {
        let g = graph(&[(0, 1, 0.4), (1, 2, 0.4)]);
        let consts = g.compute_constants();
        let sampler = Sampler::new(&g, &consts);
        let mut pool = SamplePool::new(SampleKind::Plain, 2, g.n());
        pool.extend(&g, &consts, &sampler, 100).unwrap();
        let snapshot: Vec<_> = pool.samples().to_vec();
        pool.extend(&g, &consts, &sampler, 100).unwrap();
        assert_eq!(pool.samples(), snapshot.as_slice());
    }

    #[test]
    fn pool_identical_across_worker_counts() {
        let g = graph(&[(0, 1, 0.4), (1, 2, 0.4), (2, 3, 0.4), (3, 0, 0.4)]);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let mut p = pool_of(&g, SampleKind::Importance, 77, 100);
                let consts = g.compute_constants();
                let sampler = Sampler::new(&g, &consts);
                p.extend(&g, &consts, &sampler, 200).unwrap();
                p.samples().to_vec()
            })
        };
        assert_eq!(run(1), run(8));
    }

    #[test]
    fn coverage_index_matches_membership() {
        let g = graph(&[(0, 1, 0.4), (1, 2, 0.4), (0, 2, 0.4)]);
        let pool = pool_of(&g, SampleKind::Importance, 9, 300);
        let indexed: usize = (0..g.n() as u32).map(|v| pool.covering(v).len()).sum();
        let member: usize = pool.samples().iter().map(|s| s.nodes.len()).sum();
        assert_eq!(indexed, member);
        for v in 0..g.n() as u32 {
            for &idx in pool.covering(v) {
                assert!(pool.samples()[idx as usize].nodes.contains(&v));
            }
        }
    }
}
