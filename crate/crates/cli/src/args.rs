use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "vus",
    version,
    about = "Accuracy measures for time-series anomaly detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute measures for one series and one detector score.
    Eval(EvalArgs),
    /// Standard deviation of each measure under lag, noise and ratio sweeps.
    Robustness(RobustnessArgs),
    /// z test between jittered accurate and inaccurate scores.
    Separability(SeparabilityArgs),
    /// Entropy of the method ranks each measure induces across a dataset.
    Consistency(ConsistencyArgs),
    /// Time the implementations over a one-parameter sweep.
    Bench(BenchArgs),
    /// Write a synthetic labeled series.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

/// Options shared by every command that evaluates measures.
#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Comma-separated measure names, or `all`.
    #[arg(long, default_value = "all")]
    pub measures: String,

    /// Buffer length ℓ, or `auto` to estimate it from the series period.
    #[arg(long, default_value = "auto")]
    pub buffer: String,

    /// Largest buffer of the VUS sweep [default: 2ℓ].
    #[arg(long = "max-buffer")]
    pub max_buffer: Option<usize>,

    /// Number of threshold intervals N.
    #[arg(long, default_value_t = 250)]
    pub thresholds: usize,

    /// VUS implementation: naive, opt or opt-mem.
    #[arg(long = "impl", default_value = "opt-mem")]
    pub implementation: String,

    /// How per-buffer areas are combined: mean or trapezoid.
    #[arg(long, default_value = "mean")]
    pub aggregation: String,

    /// Threshold for the point and range F measures [default: mean + 3σ].
    #[arg(long)]
    pub threshold: Option<f64>,

    /// k of precision@k [default: number of anomalous points].
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Series file with `value,label` rows.
    #[arg(long)]
    pub series: PathBuf,

    /// Score file with one value per line.
    #[arg(long)]
    pub score: PathBuf,

    #[command(flatten)]
    pub measure: MeasureArgs,

    #[arg(long, value_enum, default_value = "json")]
    pub out: OutFormat,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[arg(long)]
    pub series: PathBuf,

    /// Directory of `<method>.txt` score files for the series.
    #[arg(long)]
    pub scores: PathBuf,

    /// lag, noise, ratio or all.
    #[arg(long, default_value = "all")]
    pub kind: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub measure: MeasureArgs,
}

#[derive(Debug, Args)]
pub struct SeparabilityArgs {
    #[arg(long)]
    pub series: PathBuf,

    /// Directory of accurate `<method>.txt` scores.
    #[arg(long)]
    pub accurate: PathBuf,

    /// Directory of inaccurate `<method>.txt` scores.
    #[arg(long)]
    pub inaccurate: PathBuf,

    /// Jittered copies per score.
    #[arg(long, default_value_t = 50)]
    pub reps: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub measure: MeasureArgs,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    /// Directory of series files.
    #[arg(long)]
    pub dataset: PathBuf,

    /// Directory holding `<series>/<method>.txt` for every series.
    #[arg(long)]
    pub scores: PathBuf,

    #[command(flatten)]
    pub measure: MeasureArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Swept parameter: alpha, mean_len, std_len, n, L or N.
    #[arg(long)]
    pub param: String,

    #[arg(long, conflicts_with = "values", requires_all = ["max", "steps"])]
    pub min: Option<f64>,

    #[arg(long, conflicts_with = "values")]
    pub max: Option<f64>,

    #[arg(long, conflicts_with = "values")]
    pub steps: Option<usize>,

    /// Explicit comma-separated parameter values.
    #[arg(long)]
    pub values: Option<String>,

    /// Implementations: naive, opt, opt-mem, r-auc, auc.
    #[arg(long, default_value = "naive,opt,opt-mem")]
    pub impls: String,

    #[arg(long, default_value_t = 10)]
    pub reps: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value = "json")]
    pub out: OutFormat,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub alpha: usize,

    #[arg(long = "mean-len", default_value_t = 10.0)]
    pub mean_len: f64,

    #[arg(long = "std-len", default_value_t = 0.0)]
    pub std_len: f64,

    #[arg(long, default_value_t = 100_000)]
    pub length: usize,

    /// Period of the value channel.
    #[arg(long, default_value_t = 20)]
    pub period: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Series file to write.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write the synthetic detector score here.
    #[arg(long = "score-out")]
    pub score_out: Option<PathBuf>,
}
