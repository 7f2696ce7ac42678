use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "lamp", version, about = "Train, evaluate and analyze linear additive Markov processes")]
pub struct Cli {
    /// Worker threads for parallel loops. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collapse repeats, replace rare tokens and optionally split a text corpus.
    Preprocess(PreprocessArgs),
    /// Fit a LAMP by alternating minimization.
    Train(TrainArgs),
    /// Perplexity of a model on a corpus.
    Evaluate(EvaluateArgs),
    /// Sample a sequence from a model.
    Generate(GenerateArgs),
    /// Equilibrium, mixing and exponent-process analysis.
    Analyze(AnalyzeArgs),
    /// Fit and score an n-gram baseline.
    Baseline(BaselineArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PreprocessArgs {
    /// Text corpus: one sequence per line, whitespace-separated tokens.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Read at most this many nonblank lines.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Keep runs of repeated tokens.
    #[arg(long)]
    pub no_collapse: bool,
    /// Tokens seen fewer times than this become the rare token (0 disables).
    #[arg(long, default_value_t = 10)]
    pub min_count: u64,
    #[arg(long, default_value = lamp::data::DEFAULT_RARE_TOKEN)]
    pub rare_token: String,
    /// Train fraction; when given, writes train.json and test.json instead
    /// of corpus.json.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Corpus as text or as a `.json` cache written by `preprocess`.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// JSON training configuration; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Rounds of alternation (default 1.5: w, P, w).
    #[arg(long)]
    pub rounds: Option<f64>,
    /// Keep P at its empirical initialization.
    #[arg(long)]
    pub weight_only: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial weights proportional to decay^i (default 0.8).
    #[arg(long)]
    pub init_decay: Option<f64>,
    #[arg(long)]
    pub kkt_tol: Option<f64>,
    #[arg(long)]
    pub max_newton_iters: Option<usize>,
    #[arg(long)]
    pub support_epsilon: Option<f64>,
    #[arg(long)]
    pub prior_count: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Floor predictive probabilities and renormalize, so no transition is
    /// impossible.
    #[arg(long)]
    pub floor: bool,
    /// Floor value used with `--floor` (default 1e-10).
    #[arg(long, requires = "floor")]
    pub floor_value: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Sequence length including the start token.
    #[arg(long)]
    pub length: usize,
    /// Start token (default: the first vocabulary entry).
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    /// Stationary distribution of P (optionally against a simulated walk).
    Stationary,
    /// Mixing time of P.
    Mixing,
    /// Exponent process and its renewal rate.
    Exponent,
    /// High-probability mixing bound for the LAMP.
    Bound,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub analysis: Analysis,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated history weights; overrides the model's w.
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Threshold time of the mixing bound.
    #[arg(long = "T", default_value_t = 100)]
    pub threshold: usize,
    /// Simulation length (exponent horizon, or walk length for stationary).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Power-iteration tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Total-variation tolerance for the simulated-walk check.
    #[arg(long, default_value_t = 0.01)]
    pub tv_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Naive,
    KneserNey,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Held-out corpus, re-encoded onto the training vocabulary.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = BaselineKind::Naive)]
    pub kind: BaselineKind,
    #[arg(long, default_value_t = lamp::baselines::DEFAULT_DISCOUNT)]
    pub discount: f64,
}
