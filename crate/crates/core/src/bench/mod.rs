//! Synthetic corpora and the experiment harness: moment-error decay,
//! reconstruction error, stability under a growing corpus, and timing.
//!
//! Every experiment is a function of its [`SynthSpec`] and seeds. Results
//! are rows of `(metric, algorithm, N, seed, value, wall_time_s)`; the
//! wall time is the only column that varies between identical runs.

mod experiments;
mod metrics;
mod synth;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use experiments::{moment_error_sweep, reconstruction_sweep, stability_run, timing_run, Algorithm, DEFAULT_TRIALS, MIN_TIMING_RUNS};
pub use metrics::{err_moments, err_reconstruction, err_second_moment, log_log_slope, median, pearson, variation};
pub use synth::{generate, generate_full, sample_from_model, Latent, SynthKind, SynthSpec, Synthetic};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub metric: String,
    pub algorithm: String,
    #[serde(rename = "N")]
    pub n_docs: usize,
    pub seed: u64,
    pub value: f64,
    pub wall_time_s: f64,
}

impl BenchRow {
    pub fn new(metric: &str, algorithm: &str, n_docs: usize, seed: u64, value: f64, wall_time_s: f64) -> Self {
        Self { metric: metric.into(), algorithm: algorithm.into(), n_docs, seed, value, wall_time_s }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    pub algorithm: Algorithm,
    #[serde(rename = "N")]
    pub n_docs: usize,
    pub seed: u64,
    pub error: String,
}

impl StepFailure {
    pub fn new(algorithm: Algorithm, n_docs: usize, seed: u64, error: &Error) -> Self {
        log::warn!("{algorithm} failed at N = {n_docs}, seed {seed}: {error}");
        Self { algorithm, n_docs, seed, error: error.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub experiment: String,
    pub spec: SynthSpec,
    pub rows: Vec<BenchRow>,
    pub failures: Vec<StepFailure>,
}

impl BenchResult {
    pub fn new(experiment: &str, spec: SynthSpec) -> Self {
        Self { experiment: experiment.into(), spec, rows: Vec::new(), failures: Vec::new() }
    }

    pub fn values(&self, metric: &str, algorithm: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.metric == metric && r.algorithm == algorithm).map(|r| r.value).collect()
    }

    pub fn values_at(&self, metric: &str, algorithm: &str, n_docs: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.algorithm == algorithm && r.n_docs == n_docs)
            .map(|r| r.value)
            .collect()
    }

    pub fn append(&mut self, other: BenchResult) {
        self.rows.extend(other.rows);
        self.failures.extend(other.failures);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Whitespace-separated `N value` lines for one series, for plotting.
    pub fn series(&self, metric: &str, algorithm: &str) -> String {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.algorithm == algorithm)
            .map(|r| format!("{} {}\n", r.n_docs, r.value))
            .collect()
    }
}
