use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "spectral-topics", version, about = "Spectral learning of single topic and LDA models")]
pub struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for data-parallel kernels. Results do not depend on it.
    #[arg(long, global = true, env = "SPECTRAL_TOPICS_THREADS")]
    pub threads: Option<usize>,

    /// Run manifest path; defaults to the main output path plus `.manifest.json`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Build a corpus and vocabulary from a text file, one document per line.
    Ingest(IngestArgs),
    /// Estimate moments and write M₁, M₂ and optionally one slice of M₃.
    Moments(MomentsArgs),
    /// Fit a single topic model.
    FitStm(FitArgs),
    /// Fit an LDA model with a known α₀.
    FitLda(FitLdaArgs),
    /// Topic posteriors (single topic) or Gibbs topic mixtures (LDA) per document.
    Infer(InferArgs),
    /// Sample a synthetic corpus and its generating model.
    Synth(SynthArgs),
    /// Run a synthetic benchmark and write CSV rows.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusInput {
    /// Corpus file (JSONL).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Vocabulary file (TSV). Without it the vocabulary size is the largest word index plus one.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub vocab_size: usize,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Drop documents with fewer vocabulary tokens than this.
    #[arg(long, default_value_t = 1)]
    pub min_doc_len: u64,
    /// Output corpus (JSONL).
    #[arg(long)]
    pub out: PathBuf,
    /// Output vocabulary (TSV).
    #[arg(long)]
    pub vocab_out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[arg(long)]
    pub out: PathBuf,
    /// Average per-document estimates with equal weights instead of pooling.
    #[arg(long, conflicts_with = "alpha0")]
    pub uniform: bool,
    /// Apply the LDA adjustment with this α₀.
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Also write slice `i` of the third moment.
    #[arg(long, requires = "slice_out")]
    pub slice: Option<usize>,
    #[arg(long, requires = "slice")]
    pub slice_out: Option<PathBuf>,
    /// Evaluate the sample bound at this confidence level, using plug-in norms.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Svtd,
    Baseline,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[arg(long)]
    pub k: usize,
    /// Output model (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Decomposition report (JSON).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "svtd")]
    pub method: Method,
}

#[derive(Debug, Args, Serialize)]
pub struct FitLdaArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub alpha0: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct InferArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[arg(long)]
    pub model: PathBuf,
    /// Output (JSONL), one line per document.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = spectral_topics::inference::DEFAULT_ITERATIONS)]
    pub iterations: usize,
    #[arg(long, default_value_t = spectral_topics::inference::DEFAULT_BURN_IN)]
    pub burn_in: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthShape {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub len_min: u64,
    #[arg(long, default_value_t = 100)]
    pub len_max: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[command(flatten)]
    pub shape: SynthShape,
    #[arg(long)]
    pub docs: usize,
    /// Generate LDA data with this symmetric Dirichlet parameter per topic.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub vocab_out: Option<PathBuf>,
    /// Generating model (JSON).
    #[arg(long)]
    pub model_out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false, id = "experiment")]
pub struct Experiment {
    /// Var_N while the corpus grows one document at a time.
    #[arg(long)]
    pub stability: bool,
    /// Err₂ and Err₃ of the weighted and uniform estimators.
    #[arg(long)]
    pub moment_error: bool,
    /// Reconstruction error of SVTD against the generating model.
    #[arg(long)]
    pub reconstruction: bool,
    /// Median fit time.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    pub experiment: Experiment,
    #[command(flatten)]
    pub shape: SynthShape,
    #[arg(long, default_value_t = 50)]
    pub n_start: usize,
    #[arg(long, default_value_t = 200)]
    pub n_end: usize,
    /// Corpus sizes for the sweeps.
    #[arg(long, value_delimiter = ',', default_values_t = [100, 316, 1000, 3162, 10000])]
    pub sizes: Vec<usize>,
    /// Trials (or seeds) per corpus size; seeds run from --seed upwards.
    #[arg(long, default_value_t = spectral_topics::bench::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Skip the third-moment error in the moment sweep.
    #[arg(long)]
    pub second_only: bool,
    /// Timed repetitions (at least five are used).
    #[arg(long, default_value_t = spectral_topics::bench::MIN_TIMING_RUNS)]
    pub runs: usize,
    /// Corpus size for --timing.
    #[arg(long, default_value_t = 1000)]
    pub docs: usize,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}
