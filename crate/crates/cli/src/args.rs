//! Command-line definitions.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mp_core::{InitStrategy, NormIndex};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "mp", version, about = "Stippling, continuous line drawing and measure approximation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate an image by N dots.
    Stipple(RunArgs),
    /// Approximate an image by one curve with bounded derivatives.
    Lineart(RunArgs),
    /// Cube-partition quantization of an image into N weighted atoms.
    Quantize(QuantizeArgs),
    /// Exact Wasserstein-1 distance between two point files.
    W1(W1Args),
    /// Convergence-rate sweep of the constructive approximations.
    Rates(RatesArgs),
    /// Compare the analytic energy gradient with central differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelName {
    L1s,
    Gauss,
    L2s,
}

#[derive(Debug, Clone, Default, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub kernel: Option<KernelName>,
    /// Smoothing of the l1s and l2s kernels.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Width of the gauss kernel.
    #[arg(long)]
    pub sigma: Option<f64>,
}

/// Options shared by `stipple` and `lineart`. Any option also set in
/// `--config` is overridden by the flag.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Grayscale PNG or PGM image.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Output path stem; `.svg`, `.csv`, `.trace.csv` and `.json` are appended.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the options below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Step size (default 0.9·N/(3L)).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Highest constrained derivative order (lineart).
    #[arg(long)]
    pub m: Option<usize>,
    /// Outer norm of the derivative bounds: 1, 2 or inf (lineart).
    #[arg(long)]
    pub q: Option<NormIndex>,
    /// Speed bound (lineart).
    #[arg(long)]
    pub alpha1: Option<f64>,
    /// Acceleration bound (lineart, m = 2).
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Duration of the curve (lineart).
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Start configuration: random, grid, spiral or circle.
    #[arg(long)]
    pub init: Option<InitStrategy>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use pixel brightness as mass instead of darkness.
    #[arg(long)]
    pub no_invert: bool,
    /// Dot radius in canvas units.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Canvas side in SVG user units.
    #[arg(long)]
    pub canvas: Option<f64>,
    /// Tabulate the attraction on a lattice refined this many times per pixel (even).
    #[arg(long)]
    pub refine: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct QuantizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output path stem; `.csv` and `.svg` are appended.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub no_invert: bool,
    #[arg(long)]
    pub canvas: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricName {
    L1,
    L2,
}

#[derive(Debug, Clone, Args)]
pub struct W1Args {
    /// CSV with columns x1..xd and an optional weight column w.
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, value_enum, default_value = "l1")]
    pub metric: MetricName,
    /// Write the optimal coupling as `source,sink,mass` rows.
    #[arg(long)]
    pub plan: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateKind {
    Quantizer,
    Curve,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    #[arg(long, value_enum)]
    pub which: RateKind,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Comma-separated point counts (quantizer) or durations (curve).
    #[arg(long, value_delimiter = ',', required = true)]
    pub sweep: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path stem; `.csv` and `.dat` are appended.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Number of random configurations.
    #[arg(long, default_value_t = 20)]
    pub configs: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub step: f64,
    /// Fail when the maximal relative error reaches this value.
    #[arg(long, default_value_t = 1e-5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
