use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddgroup::pipeline::Selection;
use ddgroup::region::SpeedPreset;

#[derive(Debug, Parser)]
#[command(name = "ddgroup", version, about = "Find axis-aligned subgroups where a linear model fits well")]
pub struct Cli {
    /// Worker threads for sweeps and benchmark trials (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with planted regions.
    Synth(SynthArgs),
    /// Fit subgroups on a CSV file.
    Fit(FitArgs),
    /// Run the sample-size benchmark or the robustness sweep.
    Bench(BenchArgs),
    /// Score reported regions against a truth file.
    Score(ScoreArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Instance {
    /// Rectangle truth region, as in the worked example.
    Demo,
    /// Square truth region used by the sample-size benchmark.
    SampleSize,
    /// Two disjoint planted squares.
    TwoRegions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    None,
    Kmeans,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub instance: Option<Instance>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "ddgroup-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV with a header row.
    pub data: PathBuf,
    /// TOML config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target column name [default: y].
    #[arg(long)]
    pub target: Option<String>,
    /// Seed for the split and the pipeline.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',')]
    pub split: Option<Vec<f64>>,
    /// Number of subgroups to fit in turn.
    #[arg(long)]
    pub groups: Option<usize>,
    /// Minimum validation share of a selected region.
    #[arg(long = "p-min")]
    pub p_min: Option<f64>,
    /// Selection rule: valmse or quantile.
    #[arg(long, value_parser = parse_selection)]
    pub selection: Option<Selection>,
    /// Face speed presets to sweep: uniform, bbox.
    #[arg(long, value_delimiter = ',', value_parser = parse_speeds)]
    pub speeds: Option<Vec<SpeedPreset>>,
    /// Also fit the k-means cluster baseline.
    #[arg(long)]
    pub baseline: Option<Baseline>,
    /// Truth JSON written by `synth`; adds precision, recall and F1.
    #[arg(long = "score-truth")]
    pub score_truth: Option<PathBuf>,
    /// Fit on raw units instead of standardized features and target.
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long, default_value = "ddgroup-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run the core-misspecification sweep instead of the sample-size table.
    #[arg(long)]
    pub robustness: bool,
    #[arg(long, default_value = "ddgroup-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Report JSON written by `fit`.
    pub report: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_selection(s: &str) -> Result<Selection, String> {
    s.parse().map_err(|e: ddgroup::Error| e.to_string())
}

fn parse_speeds(s: &str) -> Result<SpeedPreset, String> {
    s.parse().map_err(|e: ddgroup::Error| e.to_string())
}
