use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::boundary::DEFAULT_CURVE_POINTS;
use crate::gaussian::DEFAULT_PHYSICAL_TOL;
use crate::homodyne::DEFAULT_BOOTSTRAP;
use crate::schemes::Scheme;
use crate::steering::DEFAULT_STEERING_TOL;

#[derive(Debug, Parser)]
#[command(
    name = "steering-lab",
    version,
    about = "Gaussian EPR-steering of two-mode squeezed states under loss and noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Covariance matrix, both steering quantifiers and the regime at one point
    Compute(ComputeArgs),
    /// Steering quantifiers as a function of the transmission eta
    Sweep(SweepArgs),
    /// Regime classification over the (eta, delta) plane
    Regions(RegionsArgs),
    /// Closed-form steering boundaries and the crossover point
    Boundary(BoundaryArgs),
    /// Monte-Carlo homodyne estimate with bootstrap error bars
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// pure | 1 | 2 | 3 (aliases: noise-on-a, noise-on-b, noisy-channel)
    #[arg(long)]
    pub scheme: Scheme,

    /// Single-mode TMSS variance V = cosh 2r, shot-noise units (>= 1)
    #[arg(long, allow_negative_numbers = true, conflicts_with = "paper_defaults")]
    pub v: Option<f64>,

    /// Use V = 1.251 (and, for `sweep` without --delta, the reference noise levels)
    #[arg(long)]
    pub paper_defaults: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format (defaults: json for compute, csv for grids and curves)
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of standard output
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Channel transmission efficiency in [0, 1]
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub eta: f64,

    /// Noise variance (not standard deviation) in shot-noise units
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,

    /// Quantifiers at or below this count as zero
    #[arg(long, default_value_t = DEFAULT_STEERING_TOL)]
    pub tol: f64,

    /// Slack on the smallest symplectic eigenvalue >= 1
    #[arg(long, default_value_t = DEFAULT_PHYSICAL_TOL)]
    pub physical_tol: f64,

    /// Report quantifiers in bits instead of nats
    #[arg(long)]
    pub bits: bool,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Noise variance; with --paper-defaults and no --delta, all reference levels
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub from: f64,

    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub to: f64,

    /// Number of evenly spaced eta values, endpoints included (>= 2)
    #[arg(long, default_value_t = 101)]
    pub steps: usize,

    #[arg(long)]
    pub bits: bool,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegionsArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Cells per axis
    #[arg(long, default_value_t = 400)]
    pub grid: usize,

    /// Cells along eta (overrides --grid)
    #[arg(long)]
    pub eta_steps: Option<usize>,

    /// Cells along delta (overrides --grid)
    #[arg(long)]
    pub delta_steps: Option<usize>,

    /// Upper end of the noise axis (default 1.2 for schemes pure/1/2, 7 for scheme 3)
    #[arg(long, allow_negative_numbers = true)]
    pub delta_max: Option<f64>,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Points per curve
    #[arg(long, default_value_t = DEFAULT_CURVE_POINTS)]
    pub points: usize,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub state: StateArgs,

    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub eta: f64,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,

    /// Shots per quadrature run
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Bootstrap replicates (>= 100)
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,

    /// Standard-form tolerance for estimated matrices (default: 10 sqrt(2/n) x variance)
    #[arg(long)]
    pub structure_tol: Option<f64>,

    /// Physicality slack for estimated matrices (default: 10 sqrt(2/n) x variance)
    #[arg(long)]
    pub physical_tol: Option<f64>,

    /// Omit the timestamp so repeated runs are byte-identical
    #[arg(long)]
    pub no_timestamp: bool,

    /// Also export the simulated records as CSV (run,index,value_a,value_b)
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,

    #[arg(long)]
    pub bits: bool,

    /// Write the JSON report to this file instead of standard output
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}
