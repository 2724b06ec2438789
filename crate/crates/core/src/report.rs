//! Machine-readable run reports. Every report carries the seeds and
//! parameters needed to regenerate itself.

use serde::{Deserialize, Serialize};

use crate::ivm::IterationTrace;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub algorithm: String,
    pub graph_id: String,
    pub budget: f64,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    /// External node ids, in selection order.
    pub seed_set: Vec<u64>,
    pub seed_set_cost: f64,
    pub estimated_benefit: Option<f64>,
    pub mc_benefit: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mc_trials: Option<u64>,
    pub mc_seed: Option<u64>,
    pub samples_generated: u64,
    pub sampling_time_ms: f64,
    pub selection_time_ms: f64,
    pub wall_time_ms: f64,
    /// Best-effort platform counter; includes graph storage.
    pub peak_rss_bytes: Option<u64>,
    pub rng_seed: u64,
    pub iterations: Option<Vec<IterationTrace>>,
}

pub const CSV_HEADER: &str = "algorithm,graph_id,budget,eps,delta,seed_set,seed_set_cost,\
estimated_benefit,mc_benefit,mc_stderr,samples_generated,sampling_time_ms,selection_time_ms,\
wall_time_ms,rng_seed";

impl RunReport {
    /// One CSV row matching [`CSV_HEADER`], field for field with the JSON.
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let seeds: Vec<String> = self.seed_set.iter().map(|s| s.to_string()).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.graph_id,
            self.budget,
            opt(self.eps),
            opt(self.delta),
            seeds.join(" "),
            self.seed_set_cost,
            opt(self.estimated_benefit),
            opt(self.mc_benefit),
            opt(self.mc_stderr),
            self.samples_generated,
            self.sampling_time_ms,
            self.selection_time_ms,
            self.wall_time_ms,
            self.rng_seed
        )
    }
}

/// Peak resident set size in bytes from /proc/self/status, when available.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: u64 = rest.trim().trim_end_matches(" kB").trim().parse().ok()?;
            return Some(kb * 1024);
        }
    }
    None
}
