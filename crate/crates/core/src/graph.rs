//! Graph ingestion, weight/cost/benefit assignment and the constants that
//! drive importance sampling.
//!
//! The in-adjacency order of every node is the order in which its in-edges
//! first appear in the input. The first-live-in-neighbor decomposition used by
//! the sampler depends on a fixed order, and file order keeps runs
//! reproducible across machines.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::index::sample as index_sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub const TRIVALENCY: [f64; 3] = [0.001, 0.01, 0.1];

/// How each attribute of a prepared graph was produced; persisted in the
/// manifest so any prepared graph can be regenerated from its raw input.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub weights: String,
    pub weight_seed: Option<u64>,
    pub costs: String,
    pub benefits: String,
    pub benefit_seed: Option<u64>,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance {
            weights: "file".into(),
            weight_seed: None,
            costs: "unit".into(),
            benefits: "uniform".into(),
            benefit_seed: None,
        }
    }
}

/// Raw edge list between ingestion and weight assignment.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    ext_ids: Vec<u64>,
    int_of_ext: HashMap<u64, u32>,
    seen: HashSet<(u32, u32)>,
    edges: Vec<(u32, u32, Option<f64>)>,
    directed: bool,
    weights: String,
    weight_seed: Option<u64>,
}

impl GraphBuilder {
    pub fn new(directed: bool) -> GraphBuilder {
        GraphBuilder {
            ext_ids: Vec::new(),
            int_of_ext: HashMap::new(),
            seen: HashSet::new(),
            edges: Vec::new(),
            directed,
            weights: "file".into(),
            weight_seed: None,
        }
    }

    fn intern(&mut self, ext: u64) -> u32 {
        match self.int_of_ext.get(&ext) {
            Some(&i) => i,
            None => {
                let i = self.ext_ids.len() as u32;
                self.ext_ids.push(ext);
                self.int_of_ext.insert(ext, i);
                i
            }
        }
    }

    /// Adds one input edge (both arcs when undirected), rejecting self-loops,
    /// duplicates and probabilities outside (0,1).
    pub fn add_edge(&mut self, u_ext: u64, v_ext: u64, p: Option<f64>) -> Result<()> {
        if u_ext == v_ext {
            return Err(Error::domain(format!("self-loop on node {u_ext}")));
        }
        if let Some(p) = p {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::domain(format!("probability {p} outside (0,1)")));
            }
        }
        let u = self.intern(u_ext);
        let v = self.intern(v_ext);
        let push_arc = |builder: &mut Self, s: u32, t: u32| -> Result<()> {
            if !builder.seen.insert((s, t)) {
                return Err(Error::domain(format!(
                    "duplicate edge {u_ext} -> {v_ext}"
                )));
            }
            builder.edges.push((s, t, p));
            Ok(())
        };
        push_arc(self, u, v)?;
        if !self.directed {
            push_arc(self, v, u)?;
        }
        Ok(())
    }

    /// Parses a whitespace-separated edge list `u v [p]`. Lines starting with
    /// `#` and blank lines are skipped. Undirected inputs produce both arcs.
    pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<GraphBuilder> {
        let path = path.as_ref();
        let file = fs::File::open(path)?;
        let reader = BufReader::new(file);
        let mut builder = GraphBuilder::new(directed);
        let path_str = path.display().to_string();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                path: path_str.clone(),
                line: lineno,
                msg,
            };
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 2 && fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected 'u v [p]', found {} fields",
                    fields.len()
                )));
            }
            let u_ext: u64 = fields[0]
                .parse()
                .map_err(|e| parse_err(format!("bad node id '{}': {e}", fields[0])))?;
            let v_ext: u64 = fields[1]
                .parse()
                .map_err(|e| parse_err(format!("bad node id '{}': {e}", fields[1])))?;
            let p = match fields.get(2) {
                Some(s) => Some(
                    s.parse::<f64>()
                        .map_err(|e| parse_err(format!("bad probability '{s}': {e}")))?,
                ),
                None => None,
            };
            builder
                .add_edge(u_ext, v_ext, p)
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(builder)
    }

    /// Test convenience: build from `(u, v, p)` triples. Node ids are
    /// interned in ascending numeric order, so internal ids equal external
    /// ids on inputs numbered 0..n-1.
    pub fn from_edges(edges: &[(u64, u64, Option<f64>)], directed: bool) -> Result<GraphBuilder> {
        let mut builder = GraphBuilder::new(directed);
        let mut ids: Vec<u64> = edges.iter().flat_map(|&(u, v, _)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            builder.intern(id);
        }
        for &(u, v, p) in edges {
            builder.add_edge(u, v, p)?;
        }
        Ok(builder)
    }

    pub fn node_count(&self) -> usize {
        self.ext_ids.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Draws each edge probability uniformly from the trivalency set
    /// {0.001, 0.01, 0.1}, overwriting any probabilities from the file.
    pub fn assign_weights_trivalency(&mut self, seed: u64) {
        let mut rng = stream_rng(seed, 0);
        for edge in &mut self.edges {
            edge.2 = Some(TRIVALENCY[rng.gen_range(0..3)]);
        }
        self.weights = "trivalency".into();
        self.weight_seed = Some(seed);
    }

    /// Finalizes adjacency. Every edge must carry a probability by now.
    pub fn build(self) -> Result<Graph> {
        let n = self.ext_ids.len();
        let mut in_adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut out_adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(self.edges.len());
        for (u, v, p) in &self.edges {
            let p = p.ok_or_else(|| {
                Error::domain(format!(
                    "edge {u} -> {v} has no probability; assign weights first"
                ))
            })?;
            edges.push((*u, *v, p));
            out_adj[*u as usize].push((*v, p));
            in_adj[*v as usize].push((*u, p));
        }
        Ok(Graph {
            ext_ids: self.ext_ids,
            edges,
            in_adj,
            out_adj,
            cost: vec![1.0; n],
            benefit: vec![1.0; n],
            provenance: Provenance {
                weights: self.weights,
                weight_seed: self.weight_seed,
                ..Provenance::default()
            },
        })
    }
}

/// Immutable after preparation; shared read-only by sampling workers.
#[derive(Debug, Clone)]
pub struct Graph {
    ext_ids: Vec<u64>,
    edges: Vec<(u32, u32, f64)>,
    in_adj: Vec<Vec<(u32, f64)>>,
    out_adj: Vec<Vec<(u32, f64)>>,
    cost: Vec<f64>,
    benefit: Vec<f64>,
    provenance: Provenance,
}

/// Precomputed sampling constants: `gamma[u]` is the probability that at
/// least one in-edge of `u` is live, `big_gamma` the total benefit mass,
/// `phi` the gamma-weighted benefit mass and `rho = phi / big_gamma`.
#[derive(Debug, Clone)]
pub struct GraphConstants {
    pub gamma: Vec<f64>,
    pub big_gamma: f64,
    pub phi: f64,
    pub rho: f64,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.ext_ids.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn in_adj(&self, v: u32) -> &[(u32, f64)] {
        &self.in_adj[v as usize]
    }

    pub fn out_adj(&self, u: u32) -> &[(u32, f64)] {
        &self.out_adj[u as usize]
    }

    pub fn out_degree(&self, u: u32) -> usize {
        self.out_adj[u as usize].len()
    }

    pub fn cost(&self, u: u32) -> f64 {
        self.cost[u as usize]
    }

    pub fn benefit(&self, u: u32) -> f64 {
        self.benefit[u as usize]
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    pub fn benefits(&self) -> &[f64] {
        &self.benefit
    }

    pub fn total_cost(&self, nodes: &[u32]) -> f64 {
        nodes.iter().map(|&u| self.cost(u)).sum()
    }

    pub fn external_id(&self, u: u32) -> u64 {
        self.ext_ids[u as usize]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `c(u) = n * outdeg(u) / m`, so costs sum to n.
    pub fn assign_costs_degree(&mut self) -> Result<()> {
        if self.m() == 0 {
            return Err(Error::domain("degree costs need at least one edge"));
        }
        let n = self.n() as f64;
        let m = self.m() as f64;
        for u in 0..self.n() {
            self.cost[u] = n * self.out_adj[u].len() as f64 / m;
        }
        self.provenance.costs = "degree".into();
        Ok(())
    }

    pub fn assign_costs_unit(&mut self) {
        self.cost.fill(1.0);
        self.provenance.costs = "unit".into();
    }

    pub fn set_costs(&mut self, costs: Vec<f64>) -> Result<()> {
        if costs.len() != self.n() {
            return Err(Error::domain("cost vector length mismatch"));
        }
        if costs.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::domain("costs must be nonnegative"));
        }
        self.cost = costs;
        self.provenance.costs = "file".into();
        Ok(())
    }

    /// Picks `floor(fraction * n)` target nodes uniformly without replacement
    /// and gives them benefit 1; every other node gets 0.
    pub fn assign_benefits_target(&mut self, fraction: f64, seed: u64) -> Result<()> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::domain(format!(
                "target fraction {fraction} outside (0,1]"
            )));
        }
        let k = (fraction * self.n() as f64).floor() as usize;
        let mut rng = stream_rng(seed, 1);
        self.benefit.fill(0.0);
        for idx in index_sample(&mut rng, self.n(), k) {
            self.benefit[idx] = 1.0;
        }
        self.provenance.benefits = format!("target:{fraction}");
        self.provenance.benefit_seed = Some(seed);
        Ok(())
    }

    pub fn assign_benefits_uniform(&mut self) {
        self.benefit.fill(1.0);
        self.provenance.benefits = "uniform".into();
        self.provenance.benefit_seed = None;
    }

    pub fn set_benefits(&mut self, benefits: Vec<f64>) -> Result<()> {
        if benefits.len() != self.n() {
            return Err(Error::domain("benefit vector length mismatch"));
        }
        if benefits.iter().any(|b| !(*b >= 0.0)) {
            return Err(Error::domain("benefits must be nonnegative"));
        }
        self.benefit = benefits;
        self.provenance.benefits = "file".into();
        self.provenance.benefit_seed = None;
        Ok(())
    }

    /// gamma(u) = 1 - prod(1 - p) over in-edges, evaluated as
    /// `-expm1(sum(ln1p(-p)))` so thousands of tiny probabilities do not
    /// underflow the product.
    pub fn compute_constants(&self) -> GraphConstants {
        let mut gamma = vec![0.0; self.n()];
        for v in 0..self.n() {
            if self.in_adj[v].is_empty() {
                continue;
            }
            let log_none: f64 = self.in_adj[v].iter().map(|&(_, p)| (-p).ln_1p()).sum();
            gamma[v] = -log_none.exp_m1();
        }
        let big_gamma: f64 = self.benefit.iter().sum();
        let phi: f64 = self
            .benefit
            .iter()
            .zip(&gamma)
            .map(|(b, g)| b * g)
            .sum();
        let rho = if big_gamma > 0.0 { phi / big_gamma } else { 0.0 };
        GraphConstants {
            gamma,
            big_gamma,
            phi,
            rho,
        }
    }

    /// Writes the prepared graph as `edges.tsv`, `nodes.tsv` and
    /// `manifest.json` under `dir`. Floats use 17 significant digits so the
    /// round-trip is exact.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut edges = fs::File::create(dir.join("edges.tsv"))?;
        for (u, v, p) in &self.edges {
            writeln!(edges, "{u}\t{v}\t{}", fmt_f64(*p))?;
        }
        let mut nodes = fs::File::create(dir.join("nodes.tsv"))?;
        for u in 0..self.n() {
            writeln!(
                nodes,
                "{u}\t{}\t{}\t{}",
                self.ext_ids[u],
                fmt_f64(self.cost[u]),
                fmt_f64(self.benefit[u])
            )?;
        }
        let manifest = Manifest {
            schema_version: 1,
            n: self.n(),
            m: self.m(),
            provenance: self.provenance.clone(),
        };
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Graph> {
        let dir = dir.as_ref();
        let manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let nodes_path = dir.join("nodes.tsv");
        let mut ext_ids = vec![0u64; manifest.n];
        let mut cost = vec![0.0; manifest.n];
        let mut benefit = vec![0.0; manifest.n];
        for (lineno, line) in BufReader::new(fs::File::open(&nodes_path)?)
            .lines()
            .enumerate()
        {
            let line = line?;
            let fields: Vec<&str> = line.split('\t').collect();
            let err = |msg: String| Error::Parse {
                path: nodes_path.display().to_string(),
                line: lineno + 1,
                msg,
            };
            if fields.len() != 4 {
                return Err(err("expected 4 tab-separated fields".into()));
            }
            let u: usize = fields[0].parse().map_err(|e| err(format!("{e}")))?;
            if u >= manifest.n {
                return Err(err(format!("node id {u} out of range")));
            }
            ext_ids[u] = fields[1].parse().map_err(|e| err(format!("{e}")))?;
            cost[u] = fields[2].parse().map_err(|e| err(format!("{e}")))?;
            benefit[u] = fields[3].parse().map_err(|e| err(format!("{e}")))?;
        }
        let edges_path = dir.join("edges.tsv");
        let mut edges = Vec::with_capacity(manifest.m);
        let mut in_adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); manifest.n];
        let mut out_adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); manifest.n];
        for (lineno, line) in BufReader::new(fs::File::open(&edges_path)?)
            .lines()
            .enumerate()
        {
            let line = line?;
            let fields: Vec<&str> = line.split('\t').collect();
            let err = |msg: String| Error::Parse {
                path: edges_path.display().to_string(),
                line: lineno + 1,
                msg,
            };
            if fields.len() != 3 {
                return Err(err("expected 3 tab-separated fields".into()));
            }
            let u: u32 = fields[0].parse().map_err(|e| err(format!("{e}")))?;
            let v: u32 = fields[1].parse().map_err(|e| err(format!("{e}")))?;
            let p: f64 = fields[2].parse().map_err(|e| err(format!("{e}")))?;
            if !(p > 0.0 && p < 1.0) {
                return Err(err(format!("probability {p} outside (0,1)")));
            }
            edges.push((u, v, p));
            out_adj[u as usize].push((v, p));
            in_adj[v as usize].push((u, p));
        }
        if edges.len() != manifest.m {
            return Err(Error::domain(format!(
                "manifest says {} edges, edges.tsv has {}",
                manifest.m,
                edges.len()
            )));
        }
        Ok(Graph {
            ext_ids,
            edges,
            in_adj,
            out_adj,
            cost,
            benefit,
            provenance: manifest.provenance,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    n: usize,
    m: usize,
    provenance: Provenance,
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(directed: bool) -> GraphBuilder {
        GraphBuilder::from_edges(
            &[(0, 1, Some(0.5)), (1, 2, Some(0.5)), (0, 2, Some(0.5))],
            directed,
        )
        .unwrap()
    }

    #[test]
    fn directed_load_counts() {
        let g = tiny(true).build().unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 3);
    }

    #[test]
    fn undirected_doubles_arcs() {
        let g = tiny(false).build().unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 6);
    }

    #[test]
    fn self_loop_rejected() {
        let err = GraphBuilder::from_edges(&[(0, 0, Some(0.5))], true).unwrap_err();
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn duplicate_edge_rejected() {
        let err =
            GraphBuilder::from_edges(&[(0, 1, Some(0.5)), (0, 1, Some(0.2))], true).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn probability_out_of_range_rejected() {
        assert!(GraphBuilder::from_edges(&[(0, 1, Some(1.0))], true).is_err());
        assert!(GraphBuilder::from_edges(&[(0, 1, Some(0.0))], true).is_err());
    }

    #[test]
    fn missing_weights_rejected_at_build() {
        let err = GraphBuilder::from_edges(&[(0, 1, None)], true)
            .unwrap()
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("no probability"));
    }

    #[test]
    fn trivalency_values_and_determinism() {
        let mut a = tiny(true);
        let mut b = tiny(true);
        a.assign_weights_trivalency(9);
        b.assign_weights_trivalency(9);
        let ga = a.build().unwrap();
        let gb = b.build().unwrap();
        assert_eq!(ga.edges(), gb.edges());
        for &(_, _, p) in ga.edges() {
            assert!(TRIVALENCY.contains(&p));
        }
    }

    #[test]
    fn trivalency_frequencies_are_uniform() {
        // Law of large numbers over 10^5 edges: each value in [0.32, 0.35].
        let edges: Vec<(u64, u64, Option<f64>)> = (0..100_000u64)
            .map(|i| (2 * i, 2 * i + 1, None))
            .collect();
        let mut b = GraphBuilder::from_edges(&edges, true).unwrap();
        b.assign_weights_trivalency(123);
        let g = b.build().unwrap();
        for value in TRIVALENCY {
            let freq = g.edges().iter().filter(|&&(_, _, p)| p == value).count() as f64 / 1e5;
            assert!((0.32..=0.35).contains(&freq), "{value}: {freq}");
        }
    }

    #[test]
    fn degree_costs_on_star() {
        // Star with 3 out-edges from the center: center costs n=4, leaves 0.
        let mut g = GraphBuilder::from_edges(
            &[(0, 1, Some(0.5)), (0, 2, Some(0.5)), (0, 3, Some(0.5))],
            true,
        )
        .unwrap()
        .build()
        .unwrap();
        g.assign_costs_degree().unwrap();
        assert_eq!(g.cost(0), 4.0);
        assert_eq!(g.cost(1), 0.0);
        let total: f64 = g.costs().iter().sum();
        assert!((total - g.n() as f64).abs() < 1e-12);
    }

    #[test]
    fn degree_costs_regular_graph_all_unit() {
        // Directed 4-cycle: every out-degree 1.
        let mut g = GraphBuilder::from_edges(
            &[
                (0, 1, Some(0.5)),
                (1, 2, Some(0.5)),
                (2, 3, Some(0.5)),
                (3, 0, Some(0.5)),
            ],
            true,
        )
        .unwrap()
        .build()
        .unwrap();
        g.assign_costs_degree().unwrap();
        assert!(g.costs().iter().all(|&c| (c - 1.0).abs() < 1e-12));
    }

    #[test]
    fn degree_costs_need_edges() {
        let mut g = GraphBuilder::from_edges(&[], true).unwrap().build().unwrap();
        assert!(g.assign_costs_degree().is_err());
    }

    #[test]
    fn target_benefits_count_and_determinism() {
        let build = || {
            let edges: Vec<(u64, u64, Option<f64>)> =
                (0..9u64).map(|i| (i, i + 1, Some(0.1))).collect();
            GraphBuilder::from_edges(&edges, true).unwrap().build().unwrap()
        };
        let mut a = build();
        let mut b = build();
        a.assign_benefits_target(0.2, 5).unwrap();
        b.assign_benefits_target(0.2, 5).unwrap();
        assert_eq!(a.benefits(), b.benefits());
        assert_eq!(a.benefits().iter().filter(|&&x| x == 1.0).count(), 2);
        let mut c = build();
        c.assign_benefits_target(1.0, 5).unwrap();
        let consts = c.compute_constants();
        assert_eq!(consts.big_gamma, c.n() as f64);
        assert!(c.assign_benefits_target(0.0, 5).is_err());
        assert!(c.assign_benefits_target(1.5, 5).is_err());
    }

    #[test]
    fn constants_on_two_parents() {
        // In-neighbors with p=0.5 each: gamma = 1 - 0.25 = 0.75.
        let g = GraphBuilder::from_edges(&[(1, 0, Some(0.5)), (2, 0, Some(0.5))], true)
            .unwrap()
            .build()
            .unwrap();
        let consts = g.compute_constants();
        assert!((consts.gamma[0] - 0.75).abs() < 1e-12);
        assert_eq!(consts.gamma[1], 0.0); // no in-edges
        assert!(consts.phi <= consts.big_gamma);
        assert!((0.0..=1.0).contains(&consts.rho));
    }

    #[test]
    fn gamma_strictly_below_one() {
        let g = tiny(false).build().unwrap();
        let consts = g.compute_constants();
        assert!(consts.gamma.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn save_load_round_trip_identity() {
        let mut b = tiny(true);
        b.assign_weights_trivalency(3);
        let mut g = b.build().unwrap();
        g.assign_costs_degree().unwrap();
        g.assign_benefits_target(0.5, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        g.save(dir.path()).unwrap();
        let g2 = Graph::load(dir.path()).unwrap();
        assert_eq!(g.edges(), g2.edges());
        assert_eq!(g.costs(), g2.costs());
        assert_eq!(g.benefits(), g2.benefits());
        assert_eq!(g.provenance(), g2.provenance());
        for u in 0..g.n() as u32 {
            assert_eq!(g.in_adj(u), g2.in_adj(u));
            assert_eq!(g.external_id(u), g2.external_id(u));
        }
    }
}
