//! Command-line argument definitions. Formats and semantics are documented
//! in FORMATS.md.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tiltsweep_core::dataset::Task;
use tiltsweep_core::indicators::RateConvention;

#[derive(Debug, Parser)]
#[command(
    name = "tiltsweep",
    version,
    about = "Stress-test black-box predictions by re-weighting a fixed test set",
    long_about = "Given a CSV dump of a model's test set (features, predictions, ground \
                  truth), tiltsweep shifts the mean of chosen variables and re-weights the \
                  observations with the KL-minimal exponential tilt, then reports how the \
                  model's error rate, prediction proportions, ROC behaviour or regression \
                  statistics respond. The model itself is never queried.\n\n\
                  Machine-readable results go to files; stdout carries a human summary. \
                  Exit codes: 0 success, 2 partial (some grid cells skipped), 1 fatal, \
                  64 usage.",
    after_help = "Output file formats are documented in FORMATS.md."
)]
pub struct Cli {
    /// Worker threads for per-variable parallelism (default: all cores;
    /// the RAYON_NUM_THREADS environment variable is also honoured)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Print per-cell diagnostics
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep indicators over a tau grid for each selected variable
    Sweep(SweepArgs),
    /// Weights for a single stress target (mean, or mean+mean+covariance)
    Weights(WeightsArgs),
    /// ROC point sequences per variable (binary tasks)
    Roc(RocArgs),
    /// Rank variables by indicator change between two grid points of a
    /// previous sweep
    Scores(ScoresArgs),
    /// Generate a reproducible synthetic dump
    Synth(SynthArgs),
    /// Saturation difference maps on the {-1, 0, 1} grid
    Saturate(SaturateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Binary,
    Multiclass,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum RatesArg {
    /// Standard confusion-matrix conditional rates
    #[default]
    Standard,
    /// Plain mass-ratio variant, for comparison only
    AsPrinted,
}

impl From<RatesArg> for RateConvention {
    fn from(value: RatesArg) -> Self {
        match value {
            RatesArg::Standard => RateConvention::Standard,
            RatesArg::AsPrinted => RateConvention::AsPrinted,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV dump (header row; all non-designated columns are features)
    #[arg(long)]
    pub input: PathBuf,

    /// Name of the prediction column
    #[arg(long)]
    pub pred: String,

    /// Name of the ground-truth column
    #[arg(long)]
    pub truth: String,

    /// Prediction task of the dump
    #[arg(long, value_enum)]
    pub task: TaskArg,

    /// Number of classes (multiclass tasks only)
    #[arg(long, required_if_eq("task", "multiclass"))]
    pub classes: Option<usize>,
}

impl InputArgs {
    pub fn task(&self) -> Task {
        match self.task {
            TaskArg::Binary => Task::Binary,
            TaskArg::Multiclass => Task::Multiclass {
                classes: self.classes.unwrap_or(0),
            },
            TaskArg::Regression => Task::Regression,
        }
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Number of equally spaced tau values on [-1, 1]
    #[arg(long, default_value_t = 21)]
    pub grid_points: usize,

    /// Explicit comma-separated tau list (overrides --grid-points); the
    /// baseline point 0 is added if missing
    #[arg(long, allow_hyphen_values = true)]
    pub taus: Option<String>,

    /// Quantile level of the stress anchors q(alpha), q(1 - alpha)
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory for this run
    #[arg(long, default_value = "tiltsweep-out")]
    pub out: PathBuf,

    /// Comma-separated subset of csv,json,svg
    #[arg(long, default_value = "csv,json")]
    pub formats: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub grid: GridArgs,

    #[command(flatten)]
    pub output: OutputArgs,

    /// Comma-separated feature names to sweep (default: all)
    #[arg(long)]
    pub vars: Option<String>,

    /// Comma-separated indicator names to report (default: all for the task)
    #[arg(long)]
    pub indicators: Option<String>,

    /// FPR/TPR convention
    #[arg(long, value_enum, default_value_t)]
    pub rates: RatesArg,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub output: OutputArgs,

    /// Variable to stress
    #[arg(long)]
    pub var: String,

    /// Stress level in [-1, 1], mapped between the quantile anchors
    #[arg(long, allow_hyphen_values = true, conflicts_with = "target")]
    pub tau: Option<f64>,

    /// Explicit mean target (alternative to --tau)
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<f64>,

    /// Quantile level of the stress anchors (with --tau)
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Second variable: constrain both means and the covariance instead
    #[arg(long, conflicts_with_all = ["tau", "target"])]
    pub cov_with: Option<String>,

    /// Covariance target (with --cov-with)
    #[arg(long, allow_hyphen_values = true, requires = "cov_with")]
    pub cov_target: Option<f64>,

    /// Mean targets "m1,m2" for the two variables (with --cov-with;
    /// default: their unweighted means)
    #[arg(long, allow_hyphen_values = true, requires = "cov_with")]
    pub mean_targets: Option<String>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub grid: GridArgs,

    #[command(flatten)]
    pub output: OutputArgs,

    /// Comma-separated feature names to sweep (default: all)
    #[arg(long)]
    pub vars: Option<String>,

    /// FPR/TPR convention
    #[arg(long, value_enum, default_value_t)]
    pub rates: RatesArg,
}

#[derive(Debug, Args)]
pub struct ScoresArgs {
    /// sweep.json produced by a previous `tiltsweep sweep` run
    #[arg(long)]
    pub sweep: PathBuf,

    /// Indicator to difference (e.g. mean, er, p1, kl)
    #[arg(long)]
    pub indicator: String,

    /// Grid point tau_a
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,

    /// Grid point tau_b; the score is indicator(tau_b) - indicator(tau_a)
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum SynthMode {
    /// Logistic-model dump with known coefficients
    #[default]
    Logistic,
    /// Sized random dump for timing runs
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum LawArg {
    /// Uniform on [0, 1)
    #[default]
    Uniform,
    /// Standard normal
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ClassifierArg {
    /// Threshold the generating model's probabilities
    #[default]
    TrueModel,
    /// Fit a logistic regression on the generated data first
    Trained,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Observations to generate
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,

    /// Comma-separated coefficient vector (logistic mode)
    #[arg(long, default_value = "-4,2,0,2,4", allow_hyphen_values = true)]
    pub beta: String,

    /// RNG seed; identical seeds give identical files
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Regressor distribution (logistic mode)
    #[arg(long, value_enum, default_value_t)]
    pub law: LawArg,

    /// Which predictions the dump carries (logistic mode)
    #[arg(long, value_enum, default_value_t)]
    pub classifier: ClassifierArg,

    #[arg(long, value_enum, default_value_t)]
    pub mode: SynthMode,

    /// Feature count (scaling mode)
    #[arg(long)]
    pub p: Option<usize>,

    /// Output CSV file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SaturateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub output: OutputArgs,

    /// Comma-separated feature names to sweep (default: all)
    #[arg(long)]
    pub vars: Option<String>,

    /// Quantile level of the stress anchors
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// FPR/TPR convention (binary tasks)
    #[arg(long, value_enum, default_value_t)]
    pub rates: RatesArg,
}
