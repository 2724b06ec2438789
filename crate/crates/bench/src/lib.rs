//! Shared instance generation for the benchmarks.

use ivm_core::graph::Graph;
use ivm_core::rng::stream_rng;
use ivm_core::GraphBuilder;
use rand::Rng;

/// Random-attachment graph with trivalency weights, unit costs and a 20%
/// benefit target set. Deterministic in `seed`.
pub fn synthetic_graph(n: u64, out_per_node: u64, seed: u64) -> Graph {
    let mut rng = stream_rng(0x517, seed);
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for v in 1..n {
        for _ in 0..out_per_node {
            let u = rng.gen_range(0..v);
            if seen.insert((u, v)) {
                edges.push((u, v, None));
            }
        }
    }
    let mut builder = GraphBuilder::from_edges(&edges, true).unwrap();
    builder.assign_weights_trivalency(seed);
    let mut g = builder.build().unwrap();
    g.assign_costs_unit();
    g.assign_benefits_target(0.2, seed).unwrap();
    g
}
