use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "depcens", version, about = "Copula models for survival data under dependent censoring")]
pub struct Cli {
    /// Worker threads for bootstrap and study fan-out (overrides DEPCENS_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Fit a copula model to a `y,delta` CSV by maximum likelihood.
    Fit(FitArgs),
    /// Simulate one censored dataset.
    Simulate(SimulateArgs),
    /// Run a Monte-Carlo simulation study and write the summary table.
    Study(StudyArgs),
    /// Tabulate the density of Y and both subdensities on a grid.
    Density(DensityArgs),
    /// Evaluate identifiability diagnostics along a log-spaced grid.
    Probe(ProbeArgs),
    /// Fit, then estimate standard errors by the nonparametric bootstrap.
    Bootstrap(BootstrapArgs),
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct ModelFamilies {
    /// Copula family: independence, frank, clayton, gumbel, gauss.
    #[arg(long, default_value = "frank")]
    pub copula: String,
    /// Margin family of T: lognormal, weibull, loglogistic, logt.
    #[arg(long, default_value = "lognormal")]
    pub margin_t: String,
    /// Margin family of C.
    #[arg(long, default_value = "lognormal")]
    pub margin_c: String,
    /// Unconstrained chart for Kendall's tau: logit or fisher.
    #[arg(long, default_value = "logit")]
    pub transform: String,
    /// Hold the log-t degrees of freedom of T fixed.
    #[arg(long)]
    pub nu_t: Option<f64>,
    /// Hold the log-t degrees of freedom of C fixed.
    #[arg(long)]
    pub nu_c: Option<f64>,
    /// Random restarts when the optimizer does not converge.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Input CSV with header `y,delta`.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub families: ModelFamilies,
    /// Add bootstrap standard errors from this many resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Also fit every copula family with the same margins and report a comparison.
    #[arg(long)]
    pub all_copulas: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output JSON path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub families: ModelFamilies,
    /// Number of resamples.
    #[arg(long = "b", default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A fully specified model: either a built-in scenario or explicit margins.
#[derive(Debug, Args, Serialize, Clone)]
pub struct ModelChoice {
    /// Built-in scenario (1 or 2) supplying log-normal margins.
    #[arg(long, conflicts_with_all = ["margin_t", "margin_c"])]
    pub scenario: Option<u8>,
    /// Margin of T as `family:p1,p2[,p3]`, e.g. `lognormal:2.2,1.0`.
    #[arg(long)]
    pub margin_t: Option<String>,
    /// Margin of C as `family:p1,p2[,p3]`.
    #[arg(long)]
    pub margin_c: Option<String>,
    #[arg(long, default_value = "frank")]
    pub copula: String,
    /// Kendall's tau of the copula.
    #[arg(long, conflicts_with = "theta")]
    pub tau: Option<f64>,
    /// Copula parameter (alternative to --tau).
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelChoice,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StudyArgs {
    #[arg(long, default_value_t = 1)]
    pub scenario: u8,
    #[arg(long, value_delimiter = ',', default_value = "frank,clayton,gumbel,gauss")]
    pub families: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.8")]
    pub taus: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "200,500,1000")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value = "logit")]
    pub transform: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelChoice,
    /// Linear grid `lo:hi:count`.
    #[arg(long, default_value = "0.01:60:600")]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub model: ModelChoice,
    /// Log-spaced grid `lo:hi:count`; default spans 1e-6 to 1e6 times the median.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
