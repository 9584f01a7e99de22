use std::path::PathBuf;

use btgn::inference::DEFAULT_SEED;
use btgn::MODEL_NAMES;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "btgn", version, about = "Body-tail generalized normal distributions: evaluate, fit, compare, sample")]
pub struct Cli {
    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "command")]
pub enum Command {
    /// Density, CDF and log-density (or the derivative kernel) on a grid.
    Eval(EvalArgs),
    /// Maximum-likelihood fit of one model.
    Fit(FitArgs),
    /// Fit several models and tabulate 2 ln BF against a reference.
    Compare(CompareArgs),
    /// Draw from a model.
    Sample(SampleArgs),
    /// Download a coinmetrics series (cached).
    Fetch(FetchArgs),
    /// KDE of the data next to a fitted or given density, for plotting.
    Plotdata(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    /// ln(pₜ/pₜ₋₁)
    Logreturns,
}

pub fn parse_model(s: &str) -> Result<String, String> {
    match btgn::model_by_name(s) {
        Some(m) => Ok(m.name().to_string()),
        None => Err(format!("unknown model {s:?}; valid models: {}", MODEL_NAMES.join(", "))),
    }
}

/// Parameter overrides. Unset values take the documented defaults
/// (mu 0, sigma 1, alpha 2, beta 2, psi 1, nu 5); the Laplace scale `b`
/// is read from `--sigma`.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub psi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
}

impl ParamArgs {
    pub fn any_set(&self) -> bool {
        [self.mu, self.sigma, self.alpha, self.beta, self.psi, self.nu]
            .iter()
            .any(Option::is_some)
    }

    /// `(flag, value)` for a model parameter name.
    pub fn lookup(&self, name: &str) -> (&'static str, f64) {
        match name {
            "mu" => ("--mu", self.mu.unwrap_or(0.0)),
            "sigma" | "b" => ("--sigma", self.sigma.unwrap_or(1.0)),
            "alpha" => ("--alpha", self.alpha.unwrap_or(2.0)),
            "beta" => ("--beta", self.beta.unwrap_or(2.0)),
            "psi" => ("--psi", self.psi.unwrap_or(1.0)),
            "nu" => ("--nu", self.nu.unwrap_or(5.0)),
            other => unreachable!("no flag for parameter {other}"),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// CSV file holding the observations.
    #[arg(long)]
    pub data: PathBuf,
    /// Column name, or zero-based index.
    #[arg(long, default_value = "0")]
    pub column: String,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Drop rows that do not parse as numbers (reported on stderr).
    #[arg(long)]
    pub skip_invalid: bool,
    /// Transform the column before use.
    #[arg(long, value_enum)]
    pub transform: Option<Transform>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitControl {
    /// Optimizer starts: the data-driven guess, then jittered copies of it.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; stdout when omitted. Writes are atomic.
    #[arg(long, short)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long, default_value = "btgn", value_parser = parse_model)]
    pub model: String,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Emit the derivative kernel of the standard BTGN instead of the density.
    #[arg(long)]
    pub kernel_derivative: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: String,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub control: FitControl,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Comma-separated model names.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_model)]
    pub models: Vec<String>,
    /// `best` or a model name.
    #[arg(long, default_value = "best")]
    pub reference: String,
    /// Competitor fitted elsewhere, as `name:loglik:k` (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    pub external: Vec<String>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub control: FitControl,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value = "btgn", value_parser = parse_model)]
    pub model: String,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, short)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FetchArgs {
    #[arg(long)]
    pub asset: String,
    /// Metric identifier, e.g. PriceUSD.
    #[arg(long)]
    pub metric: String,
    #[arg(long)]
    pub start: String,
    #[arg(long)]
    pub end: String,
    #[arg(long, default_value = btgn::datapipe::DEFAULT_ENDPOINT)]
    pub endpoint: String,
    /// Response cache; defaults to `.btgn-cache` beside the output.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Serve only from the cache.
    #[arg(long)]
    pub offline: bool,
    #[arg(long, value_enum)]
    pub transform: Option<Transform>,
    /// JSON pointer to the series array.
    #[arg(long, default_value = "/metricData/series")]
    pub series_pointer: String,
    /// JSON pointer to the timestamp within one entry.
    #[arg(long, default_value = "/time")]
    pub time_pointer: String,
    /// JSON pointer to the value within one entry.
    #[arg(long, default_value = "/values/0")]
    pub value_pointer: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: String,
    /// Fixed parameters; when none are given the model is fitted to the data.
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub control: FitControl,
    /// Grid bounds; default to the data range padded by 10%.
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// KDE bandwidth; Silverman's rule when omitted.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}
