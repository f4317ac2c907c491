use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use llmshap_core::{Method, OutsideFeatures};
use llmshap_llm::Mode;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "llmshap", version, about = "Shapley-style feature attribution for stochastic payoff functions")]
pub struct Cli {
    /// Log verbosity (-v info, -vv debug). RUST_LOG overrides it.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attribute one payoff source with one method.
    Attribute(AttributeArgs),
    /// Check efficiency, symmetry and null player on table games and print
    /// the method × axiom compliance matrix.
    Audit(AuditArgs),
    /// Count inference calls and time each method over a range of sizes.
    Bench(BenchArgs),
    /// Compare each method against exact Shapley values on a dataset.
    Compare(CompareArgs),
    /// Parse a dataset and report what would be attributed.
    IngestCheck(IngestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Exact,
    Cached,
    SlidingWindow,
    Counterfactual,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::Cached => Method::Cached,
            MethodArg::SlidingWindow => Method::SlidingWindow,
            MethodArg::Counterfactual => Method::Counterfactual,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum OutsideArg {
    /// Out-of-window features stay in every prompt.
    Present,
    /// Each window is played on its own.
    Absent,
}

impl From<OutsideArg> for OutsideFeatures {
    fn from(o: OutsideArg) -> Self {
        match o {
            OutsideArg::Present => OutsideFeatures::Present,
            OutsideArg::Absent => OutsideFeatures::Absent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Record,
    Replay,
    Live,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Record => Mode::Record,
            ModeArg::Replay => Mode::Replay,
            ModeArg::Live => Mode::Live,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum BackendArg {
    /// OpenAI-compatible HTTP endpoint; key in LLMSHAP_API_KEY.
    Http,
    /// Built-in keyword matcher, no network.
    Offline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum GrandArg {
    /// Query the full prompt again and compare with the pinned base answer.
    Fresh,
    /// Score the grand coalition against the base answer itself.
    Pinned,
}

#[derive(Clone, Debug, Args)]
pub struct ExecArgs {
    /// Draws averaged per coalition evaluation.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Coalition evaluations in flight at once.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Clone, Debug, Args)]
pub struct WindowArgs {
    /// Sliding-window width. Required for sliding_window.
    #[arg(long)]
    pub window_size: Option<usize>,
    /// Treatment of features outside the current window.
    #[arg(long, value_enum, default_value_t = OutsideArg::Present)]
    pub outside_features: OutsideArg,
}

#[derive(Clone, Debug, Args)]
pub struct LlmArgs {
    /// JSON-lines transcript of completions and embeddings.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// record: query the backend and append to the transcript. replay: answer only from it. live: no transcript
    #[arg(long, value_enum, default_value_t = ModeArg::Replay)]
    pub mode: ModeArg,
    /// Where record and live runs get their answers.
    #[arg(long, value_enum, default_value_t = BackendArg::Http)]
    pub backend: BackendArg,
    /// Chat model name [default: gpt-4.1-mini]
    #[arg(long)]
    pub model: Option<String>,
    /// Sampling temperature [default: 0.2]
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Temperature 0 and seed 42.
    #[arg(long)]
    pub deterministic: bool,
    /// Base URL of the OpenAI-compatible API.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Embedding model used to score answers
    #[arg(long)]
    pub embedding_model: Option<String>,
    #[arg(long, value_enum, default_value_t = GrandArg::Fresh)]
    pub grand_payoff: GrandArg,
}

#[derive(Clone, Debug, Args)]
pub struct AttributeArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Evaluate every window coalition afresh instead of through a cache.
    #[arg(long)]
    pub uncached_window: bool,
    #[command(flatten)]
    pub exec: ExecArgs,
    /// Seed for noisy games, or the inference seed for dataset sources.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance for the efficiency line of the summary.
    #[arg(long, default_value_t = llmshap_core::audit::DEFAULT_TOLERANCE)]
    pub tolerance: f64,

    /// Table-game JSON file.
    #[arg(long, conflicts_with_all = ["fixture", "dataset"])]
    pub game: Option<PathBuf>,
    /// Name of a built-in game (see `audit`).
    #[arg(long, conflicts_with = "dataset")]
    pub fixture: Option<String>,
    /// Add Gaussian noise with this standard deviation to the table game.
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Disease/symptom CSV; attributes one row through the model.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// 0-based row among the usable dataset rows.
    #[arg(long, default_value_t = 0)]
    pub instance: usize,
    #[command(flatten)]
    pub llm: LlmArgs,

    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the ranked table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Debug, Args)]
pub struct AuditArgs {
    /// Table-game JSON file or directory of them; repeatable. Defaults to
    /// the built-in games.
    #[arg(long)]
    pub game: Vec<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub window_size: usize,
    #[arg(long, value_enum, default_value_t = OutsideArg::Present)]
    pub outside_features: OutsideArg,
    #[arg(long, default_value_t = llmshap_core::audit::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Treat payoffs within this distance as equal when deciding whether
    /// two features are interchangeable or a feature is a dummy.
    #[arg(long)]
    pub antecedent_eps: Option<f64>,
    /// Noisy trials per game for the exact and cached methods.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exit 0 even when the matrix differs from the expected pattern.
    #[arg(long)]
    pub allow_mismatch: bool,
    /// Write the JSON matrix here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated methods; `sliding_window=W` fixes the width.
    #[arg(long, default_value = "exact,cached,counterfactual,sliding_window")]
    pub methods: String,
    /// Width for a bare `sliding_window` entry.
    #[arg(long, default_value_t = 3)]
    pub window_size: usize,
    #[arg(long, value_enum, default_value_t = OutsideArg::Present)]
    pub outside_features: OutsideArg,
    /// Route sliding-window evaluations through a cache.
    #[arg(long)]
    pub window_cache: bool,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, default_value_t = 2)]
    pub runs: usize,
    #[command(flatten)]
    pub exec: ExecArgs,
    /// Seed for the random games.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add Gaussian noise to the random games.
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Comma-separated methods compared against exact Shapley values;
    /// `sliding_window=W` fixes the width.
    #[arg(long, default_value = "cached,counterfactual,sliding_window")]
    pub methods: String,
    /// Width for a bare `sliding_window` entry.
    #[arg(long, default_value_t = 3)]
    pub window_size: usize,
    #[arg(long, value_enum, default_value_t = OutsideArg::Present)]
    pub outside_features: OutsideArg,
    #[arg(long)]
    pub uncached_window: bool,
    /// Only this 0-based row.
    #[arg(long)]
    pub instance: Option<usize>,
    /// Smallest feature count considered.
    #[arg(long, default_value_t = 4)]
    pub n_min: usize,
    /// Largest feature count considered.
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[command(flatten)]
    pub exec: ExecArgs,
    /// Inference seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub llm: LlmArgs,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub dataset: PathBuf,
}
