use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use ivm_cli::{
    cmd_eval, cmd_oracle, cmd_prepare, cmd_run, parse_budgets, parse_seed_list, write_csv,
    write_reports, Algo, BenefitSpec, CliError, CliResult, CostSpec, DeltaSpec, EvalArgs,
    OracleArgs, PrepareArgs, RunArgs, WeightSpec,
};

#[derive(Parser)]
#[command(name = "ivm", about = "Cost-aware targeted viral marketing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest an edge list and persist a prepared graph
    Prepare(PrepareCli),
    /// Run a seed-selection algorithm over one budget or a sweep
    Run(RunCli),
    /// Monte Carlo evaluation of the seed sets in a report file
    Eval(EvalCli),
    /// Exact values on tiny graphs
    Oracle(OracleCli),
}

#[derive(Args)]
struct PrepareCli {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, conflicts_with = "undirected")]
    directed: bool,
    #[arg(long)]
    undirected: bool,
    /// trivalency | file
    #[arg(long, default_value = "file")]
    weights: String,
    /// degree | unit | file:<path>
    #[arg(long, default_value = "unit")]
    costs: String,
    /// target:<frac> | uniform | file:<path>
    #[arg(long, default_value = "uniform")]
    benefits: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunCli {
    #[arg(long)]
    graph: PathBuf,
    /// ivm | bct | random | degree
    #[arg(long)]
    algo: String,
    /// single value or a:b:step sweep
    #[arg(long)]
    budget: String,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// number, or auto for 1/n
    #[arg(long, default_value = "auto")]
    delta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV summary alongside the JSON
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Pool-size override for the fixed-count baseline
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args)]
struct EvalCli {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to rewriting the report file in place
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleCli {
    #[command(subcommand)]
    which: OracleCommand,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exact expected benefit of a fixed seed set
    Benefit {
        #[arg(long)]
        graph: PathBuf,
        /// comma-separated node ids
        #[arg(long, default_value = "")]
        seeds: String,
    },
    /// Exact optimum over all feasible seed sets
    Opt {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        budget: f64,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Prepare(p) => {
            if p.directed == p.undirected {
                return Err(CliError::Usage(
                    "exactly one of --directed / --undirected is required".into(),
                ));
            }
            cmd_prepare(&PrepareArgs {
                input: p.input,
                directed: p.directed,
                weights: p.weights.parse::<WeightSpec>()?,
                costs: p.costs.parse::<CostSpec>()?,
                benefits: p.benefits.parse::<BenefitSpec>()?,
                seed: p.seed,
                out: p.out,
            })
        }
        Command::Run(r) => {
            let args = RunArgs {
                graph_dir: r.graph,
                algo: r.algo.parse::<Algo>()?,
                budgets: parse_budgets(&r.budget)?,
                eps: r.eps,
                delta: r.delta.parse::<DeltaSpec>()?,
                seed: r.seed,
                threads: r.threads,
                samples: r.samples,
            };
            let reports = cmd_run(&args)?;
            write_reports(&reports, r.out.as_deref())?;
            if let Some(csv) = &r.csv {
                write_csv(&reports, csv)?;
            }
            Ok(())
        }
        Command::Eval(e) => {
            cmd_eval(&EvalArgs {
                report: e.report,
                graph_dir: e.graph,
                trials: e.trials,
                seed: e.seed,
                out: e.out,
            })?;
            Ok(())
        }
        Command::Oracle(o) => {
            let args = match o.which {
                OracleCommand::Benefit { graph, seeds } => OracleArgs::Benefit {
                    graph_dir: graph,
                    seeds: parse_seed_list(&seeds)?,
                },
                OracleCommand::Opt { graph, budget } => OracleArgs::Opt {
                    graph_dir: graph,
                    budget,
                },
            };
            let out = cmd_oracle(&args)?;
            println!("{}", serde_json::to_string(&out).map_err(ivm_core::Error::from)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 on bad flags by default; this tool reserves 2 for
            // data errors and reports usage problems as 1.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ivm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
