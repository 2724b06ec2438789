//! Cost-aware targeted viral marketing under the independent cascade model:
//! importance benefit sampling, an adaptive sample-budget loop with a
//! statistical stopping rule, the budgeted max-coverage greedy, baselines,
//! and exact oracles for tiny instances.

pub mod alias;
pub mod baselines;
pub mod bmc;
pub mod bounds;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod ivm;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod sampling;

pub use bmc::{IgaMode, SeedSet};
pub use error::{Error, Result};
pub use graph::{Graph, GraphBuilder, GraphConstants};
pub use ivm::{IvmConfig, IvmOutcome};
pub use report::RunReport;
pub use sampling::{BenefitSample, SampleKind, SamplePool, Sampler};
