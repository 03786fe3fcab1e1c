use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrenew_core::{GridOptions, Layout, Sampling};

#[derive(Debug, Parser)]
#[command(
    name = "qrenew",
    version,
    about = "Classical and quantum memory of continuous-time renewal processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full complexity report for one process on one grid.
    Analyze(AnalyzeArgs),
    /// C_mu, C_q and E as the grid is refined.
    SweepDiscretization(SweepDiscretizationArgs),
    /// C_q and E of delayed Poisson processes across tau_R / tau_L.
    SweepRatio(SweepRatioArgs),
    /// Leading eigenvalues of the quantum steady state.
    Eigenspectrum(EigenspectrumArgs),
    /// Sample an emission trajectory.
    Sample(SampleArgs),
    /// Run the cross-module invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Left,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Architecture,
    Truncated,
}

#[derive(Debug, Clone, Args)]
pub struct GridFlags {
    /// Unlock grids larger than 8192 states.
    #[arg(long)]
    pub allow_large_n: bool,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub sampling: SamplingArg,
    #[arg(long, value_enum, default_value = "architecture")]
    pub layout: LayoutArg,
}

impl GridFlags {
    pub fn options(&self, n: usize) -> GridOptions {
        GridOptions::new(n)
            .allow_large_n(self.allow_large_n)
            .sampling(match self.sampling {
                SamplingArg::Left => Sampling::Left,
                SamplingArg::Midpoint => Sampling::Midpoint,
            })
            .layout(match self.layout {
                LayoutArg::Architecture => Layout::Architecture,
                LayoutArg::Truncated => Layout::Truncated,
            })
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputFlags {
    /// Output file; stdout when omitted. CSV files get a `.meta.json` sidecar.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Process definition (JSON).
    #[arg(long)]
    pub process: PathBuf,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SweepDiscretizationArgs {
    #[arg(long)]
    pub process: PathBuf,
    /// Grid sizes, comma separated.
    #[arg(
        long = "n",
        value_delimiter = ',',
        default_value = "16,32,64,128,256,512,1024,2048,4096,8192"
    )]
    pub n_list: Vec<usize>,
    /// Grid points evaluated concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SweepRatioArgs {
    /// Values of tau_R / tau_L, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.1,0.5,1,2,5")]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau_l: f64,
    /// Second absolute timescale used to check that C_q depends only on the ratio.
    #[arg(long, default_value_t = 3.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct EigenspectrumArgs {
    #[arg(long)]
    pub process: PathBuf,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Number of eigenvalues written.
    #[arg(long, default_value_t = 500)]
    pub n_dump: usize,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub process: PathBuf,
    /// Number of emissions.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time since the last emission at time zero.
    #[arg(long, default_value_t = 0.0)]
    pub origin: f64,
    /// Simulate the step-by-step grid protocol instead of sampling directly.
    #[arg(long)]
    pub protocol: bool,
    /// Grid size for `--protocol`.
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Check a single process instead of the built-in set.
    #[arg(long)]
    pub process: Option<PathBuf>,
    /// Grid size for the convergence-dependent checks.
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    #[arg(long)]
    pub allow_large_n: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flip the sign of every off-diagonal overlap (fault injection).
    #[arg(long, hide = true)]
    pub inject_overlap_sign_error: bool,
}
