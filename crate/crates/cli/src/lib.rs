//! Command implementations behind the `ivm` binary. Exposed as a library so
//! integration tests can drive runs without spawning processes.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ivm_core::baselines::{bct_default_count, run_bct_fixed, run_degree, run_random};
use ivm_core::graph::Graph;
use ivm_core::ivm::run_ivm;
use ivm_core::oracle::{exact_benefit, exact_opt, monte_carlo_benefit};
use ivm_core::report::{peak_rss_bytes, RunReport, CSV_HEADER, REPORT_SCHEMA_VERSION};
use ivm_core::{GraphBuilder, IvmConfig};

/// Usage errors exit with 1, data errors with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(ivm_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ivm_core::Error> for CliError {
    fn from(e: ivm_core::Error) -> Self {
        CliError::Data(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Trivalency,
    File,
}

impl FromStr for WeightSpec {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "trivalency" => Ok(WeightSpec::Trivalency),
            "file" => Ok(WeightSpec::File),
            other => Err(usage(format!("unknown weight scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    Degree,
    Unit,
    File(PathBuf),
}

impl FromStr for CostSpec {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "degree" => Ok(CostSpec::Degree),
            "unit" => Ok(CostSpec::Unit),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(CostSpec::File(path.into())),
                _ => Err(usage(format!("unknown cost scheme '{other}'"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenefitSpec {
    Target(f64),
    Uniform,
    File(PathBuf),
}

impl FromStr for BenefitSpec {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        if s == "uniform" {
            return Ok(BenefitSpec::Uniform);
        }
        if let Some(frac) = s.strip_prefix("target:") {
            let frac: f64 = frac
                .parse()
                .map_err(|e| usage(format!("bad target fraction '{frac}': {e}")))?;
            return Ok(BenefitSpec::Target(frac));
        }
        match s.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(BenefitSpec::File(path.into())),
            _ => Err(usage(format!("unknown benefit scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PrepareArgs {
    pub input: PathBuf,
    pub directed: bool,
    pub weights: WeightSpec,
    pub costs: CostSpec,
    pub benefits: BenefitSpec,
    pub seed: u64,
    pub out: PathBuf,
}

/// Reads `ext_id value` lines keyed by external node id. Nodes not listed
/// keep their default value of 1.
fn read_node_values(path: &Path, g: &Graph, what: &str) -> CliResult<Vec<f64>> {
    let by_ext: HashMap<u64, u32> = (0..g.n() as u32).map(|u| (g.external_id(u), u)).collect();
    let mut values = vec![1.0; g.n()];
    let text = fs::read_to_string(path).map_err(ivm_core::Error::from)?;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| {
            CliError::Data(ivm_core::Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg,
            })
        };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected 'node {what}'")));
        }
        let ext: u64 = fields[0].parse().map_err(|e| err(format!("{e}")))?;
        let value: f64 = fields[1].parse().map_err(|e| err(format!("{e}")))?;
        let &u = by_ext
            .get(&ext)
            .ok_or_else(|| err(format!("node {ext} not in the graph")))?;
        values[u as usize] = value;
    }
    Ok(values)
}

pub fn cmd_prepare(args: &PrepareArgs) -> CliResult<()> {
    let mut builder = GraphBuilder::load_edge_list(&args.input, args.directed)?;
    if args.weights == WeightSpec::Trivalency {
        builder.assign_weights_trivalency(args.seed);
    }
    let mut g = builder.build()?;
    match &args.costs {
        CostSpec::Degree => g.assign_costs_degree()?,
        CostSpec::Unit => g.assign_costs_unit(),
        CostSpec::File(path) => {
            let costs = read_node_values(path, &g, "cost")?;
            g.set_costs(costs)?;
        }
    }
    match &args.benefits {
        BenefitSpec::Target(frac) => g.assign_benefits_target(*frac, args.seed)?,
        BenefitSpec::Uniform => g.assign_benefits_uniform(),
        BenefitSpec::File(path) => {
            let benefits = read_node_values(path, &g, "benefit")?;
            g.set_benefits(benefits)?;
        }
    }
    g.save(&args.out)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Ivm,
    Bct,
    Random,
    Degree,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ivm => "ivm",
            Algo::Bct => "bct",
            Algo::Random => "random",
            Algo::Degree => "degree",
        }
    }
}

impl FromStr for Algo {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "ivm" => Ok(Algo::Ivm),
            "bct" => Ok(Algo::Bct),
            "random" => Ok(Algo::Random),
            "degree" => Ok(Algo::Degree),
            other => Err(usage(format!("unknown algo '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum DeltaSpec {
    /// delta = 1/n.
    Auto,
    Fixed(f64),
}

impl FromStr for DeltaSpec {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        if s == "auto" {
            return Ok(DeltaSpec::Auto);
        }
        let x: f64 = s
            .parse()
            .map_err(|e| usage(format!("bad delta '{s}': {e}")))?;
        Ok(DeltaSpec::Fixed(x))
    }
}

/// `v` or `a:b:step`, inclusive on both ends.
pub fn parse_budgets(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> CliResult<f64> {
        s.parse()
            .map_err(|e| usage(format!("bad budget '{s}': {e}")))
    };
    match parts.as_slice() {
        [v] => {
            let v = num(v)?;
            if !(v > 0.0) {
                return Err(usage(format!("budget {v} must be positive")));
            }
            Ok(vec![v])
        }
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(a > 0.0 && step > 0.0 && b >= a) {
                return Err(usage(format!("bad budget sweep '{spec}'")));
            }
            let mut out = Vec::new();
            let mut i = 0u64;
            loop {
                let v = a + step * i as f64;
                if v > b * (1.0 + 1e-12) {
                    break;
                }
                out.push(v);
                i += 1;
            }
            Ok(out)
        }
        _ => Err(usage(format!(
            "budget '{spec}' must be a value or a:b:step"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub graph_dir: PathBuf,
    pub algo: Algo,
    pub budgets: Vec<f64>,
    pub eps: f64,
    pub delta: DeltaSpec,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Overrides the fixed-count baseline's pool size.
    pub samples: Option<u64>,
}

fn graph_id_of(dir: &Path) -> String {
    dir.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

pub fn cmd_run(args: &RunArgs) -> CliResult<Vec<RunReport>> {
    let g = Graph::load(&args.graph_dir)?;
    let consts = g.compute_constants();
    let delta = match args.delta {
        DeltaSpec::Auto => 1.0 / g.n() as f64,
        DeltaSpec::Fixed(x) => x,
    };
    let graph_id = graph_id_of(&args.graph_dir);
    let run_all = || -> CliResult<Vec<RunReport>> {
        let mut reports = Vec::with_capacity(args.budgets.len());
        for &budget in &args.budgets {
            reports.push(run_one(&g, &consts, args, budget, delta, &graph_id)?);
        }
        Ok(reports)
    };
    match args.threads {
        // A scoped pool instead of the global one, so library callers can
        // vary the worker count within one process.
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| usage(format!("bad --threads: {e}")))?;
            pool.install(run_all)
        }
        None => run_all(),
    }
}

fn run_one(
    g: &Graph,
    consts: &ivm_core::GraphConstants,
    args: &RunArgs,
    budget: f64,
    delta: f64,
    graph_id: &str,
) -> CliResult<RunReport> {
    let clock = std::time::Instant::now();
    let (seed_set, samples, sampling_ms, selection_ms, iterations) = match args.algo {
        Algo::Ivm => {
            let cfg = IvmConfig::new(args.eps, delta, budget, args.seed)?;
            let out = run_ivm(g, consts, &cfg)?;
            (
                out.seed_set,
                out.samples_generated as u64,
                out.sampling_ms,
                out.selection_ms,
                Some(out.trace),
            )
        }
        Algo::Bct => {
            let out = run_bct_fixed(g, consts, budget, args.eps, delta, args.samples, args.seed)?;
            (
                out.seed_set,
                out.samples_generated as u64,
                out.sampling_ms,
                out.selection_ms,
                None,
            )
        }
        Algo::Random => {
            let clock = std::time::Instant::now();
            let set = run_random(g, budget, args.seed);
            (set, 0, 0.0, clock.elapsed().as_secs_f64() * 1e3, None)
        }
        Algo::Degree => {
            let clock = std::time::Instant::now();
            let set = run_degree(g, budget);
            (set, 0, 0.0, clock.elapsed().as_secs_f64() * 1e3, None)
        }
    };
    let statistical = matches!(args.algo, Algo::Ivm | Algo::Bct);
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        algorithm: args.algo.name().into(),
        graph_id: graph_id.into(),
        budget,
        eps: statistical.then_some(args.eps),
        delta: statistical.then_some(delta),
        seed_set: seed_set.nodes.iter().map(|&u| g.external_id(u)).collect(),
        seed_set_cost: seed_set.total_cost,
        estimated_benefit: seed_set.est_benefit,
        mc_benefit: None,
        mc_stderr: None,
        mc_trials: None,
        mc_seed: None,
        samples_generated: samples,
        sampling_time_ms: sampling_ms,
        selection_time_ms: selection_ms,
        wall_time_ms: clock.elapsed().as_secs_f64() * 1e3,
        peak_rss_bytes: peak_rss_bytes(),
        rng_seed: args.seed,
        iterations,
    })
}

/// Worst-case pool size of the fixed-count baseline without running it.
pub fn bct_planned_count(graph_dir: &Path, budget: f64, eps: f64, delta: f64) -> CliResult<u64> {
    let g = Graph::load(graph_dir)?;
    let consts = g.compute_constants();
    Ok(bct_default_count(&g, &consts, budget, eps, delta)?)
}

pub fn write_reports(reports: &[RunReport], out: Option<&Path>) -> CliResult<()> {
    let json = serde_json::to_string_pretty(reports).map_err(ivm_core::Error::from)?;
    match out {
        Some(path) => fs::write(path, json + "\n").map_err(ivm_core::Error::from)?,
        None => println!("{json}"),
    }
    Ok(())
}

pub fn write_csv(reports: &[RunReport], path: &Path) -> CliResult<()> {
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in reports {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    fs::write(path, text).map_err(ivm_core::Error::from)?;
    Ok(())
}

pub fn read_reports(path: &Path) -> CliResult<Vec<RunReport>> {
    let text = fs::read_to_string(path).map_err(ivm_core::Error::from)?;
    // Accept a single report object as well as a run's array.
    if let Ok(one) = serde_json::from_str::<RunReport>(&text) {
        return Ok(vec![one]);
    }
    Ok(serde_json::from_str(&text).map_err(ivm_core::Error::from)?)
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub report: PathBuf,
    pub graph_dir: PathBuf,
    pub trials: u64,
    pub seed: u64,
    /// Defaults to rewriting the report file.
    pub out: Option<PathBuf>,
}

fn internal_seeds(g: &Graph, ext: &[u64]) -> CliResult<Vec<u32>> {
    let by_ext: HashMap<u64, u32> = (0..g.n() as u32).map(|u| (g.external_id(u), u)).collect();
    ext.iter()
        .map(|id| {
            by_ext.get(id).copied().ok_or_else(|| {
                CliError::Data(ivm_core::Error::domain(format!(
                    "seed node {id} not in the graph"
                )))
            })
        })
        .collect()
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<Vec<RunReport>> {
    if args.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let g = Graph::load(&args.graph_dir)?;
    let mut reports = read_reports(&args.report)?;
    for report in &mut reports {
        let seeds = internal_seeds(&g, &report.seed_set)?;
        let (mean, stderr) = monte_carlo_benefit(&g, &seeds, args.trials, args.seed);
        report.mc_benefit = Some(mean);
        report.mc_stderr = Some(stderr);
        report.mc_trials = Some(args.trials);
        report.mc_seed = Some(args.seed);
    }
    let out = args.out.as_deref().unwrap_or(&args.report);
    write_reports(&reports, Some(out))?;
    Ok(reports)
}

#[derive(Debug, Clone)]
pub enum OracleArgs {
    Benefit { graph_dir: PathBuf, seeds: Vec<u64> },
    Opt { graph_dir: PathBuf, budget: f64 },
}

#[derive(Debug, serde::Serialize)]
pub struct OracleOutput {
    pub value: f64,
    pub nodes: Option<Vec<u64>>,
}

pub fn cmd_oracle(args: &OracleArgs) -> CliResult<OracleOutput> {
    match args {
        OracleArgs::Benefit { graph_dir, seeds } => {
            let g = Graph::load(graph_dir)?;
            let seeds = internal_seeds(&g, seeds)?;
            let value = exact_benefit(&g, &seeds)?;
            Ok(OracleOutput { value, nodes: None })
        }
        OracleArgs::Opt { graph_dir, budget } => {
            let g = Graph::load(graph_dir)?;
            let (nodes, value) = exact_opt(&g, *budget)?;
            let ext = nodes.iter().map(|&u| g.external_id(u)).collect();
            Ok(OracleOutput {
                value,
                nodes: Some(ext),
            })
        }
    }
}

pub fn parse_seed_list(s: &str) -> CliResult<Vec<u64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|e| usage(format!("bad seed id '{part}': {e}")))
        })
        .collect()
}
