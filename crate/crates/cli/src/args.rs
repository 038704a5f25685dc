use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "scn",
    version,
    about = "Supply chain network formation: payoffs, equilibria, phase maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form expected payoffs of every agent in a two-tier network.
    Payoff(PayoffArgs),
    /// Monte Carlo payoff estimates for a network of any depth.
    Simulate(SimulateArgs),
    /// Equilibrium enumeration, Nash checks and best-response dynamics.
    Equilibria(EquilibriaArgs),
    /// Thresholds, feasibility bounds and regime quantities of the 2x2 game.
    Thresholds(ThresholdArgs),
    /// Phase map of the 2x2 game: predicted against enumerated equilibria.
    Sweep(SweepArgs),
    /// Heterogeneous-supplier payoffs, optimal reliability and monotonicity scans.
    Hetero(HeteroArgs),
}

/// Game parameters. Flags override values from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// JSON file with any of n, m, tiers, d, lambda, c, gamma, lambda_r, lambda_sup, gamma_sup.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Consumer demand per retailer.
    #[arg(long = "d")]
    pub d: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Cost per link.
    #[arg(long)]
    pub c: Option<f64>,
    /// Congestion cost coefficient.
    #[arg(long)]
    pub gamma: Option<f64>,
}

/// Per-supplier heterogeneity.
#[derive(Debug, Clone, Default, Args)]
pub struct HeteroFlags {
    /// Retailer success probability.
    #[arg(long)]
    pub lambda_r: Option<f64>,
    /// Comma-separated supplier success probabilities.
    #[arg(long, value_delimiter = ',')]
    pub lambda_sup: Option<Vec<f64>>,
    /// Comma-separated supplier congestion coefficients.
    #[arg(long, value_delimiter = ',')]
    pub gamma_sup: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PayoffArgs {
    /// Network JSON file.
    #[arg(long)]
    pub net: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub hetero: HeteroFlags,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EquilibriumMode {
    Enumerate,
    NashCheck,
    BrDynamics,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[arg(long, value_enum, default_value_t = EquilibriumMode::Enumerate)]
    pub mode: EquilibriumMode,
    /// Network JSON file (start network for dynamics, subject of a Nash check).
    #[arg(long)]
    pub net: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub hetero: HeteroFlags,
    /// Report one equilibrium per supplier relabeling class.
    #[arg(long)]
    pub canonical: bool,
    /// Include a deviation certificate for every rejected profile.
    #[arg(long)]
    pub certificates: bool,
    #[arg(long, default_value_t = 100)]
    pub max_rounds: usize,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Out-degree at which to evaluate the optimal foreign congestion
    /// (defaults to the rounded optimal out-degree).
    #[arg(long)]
    pub degree: Option<f64>,
    /// Own-supplier reliability for the optimal-reliability formula.
    #[arg(long)]
    pub lambda_1: Option<f64>,
    /// Other supplier's reliability for the optimal-reliability formula.
    #[arg(long)]
    pub lambda_2: Option<f64>,
    #[arg(long)]
    pub lambda_r: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.63)]
    pub lambda_lo: f64,
    #[arg(long, default_value_t = 0.98)]
    pub lambda_hi: f64,
    #[arg(long, default_value_t = 40)]
    pub lambda_count: usize,
    /// Lower end of a fixed γ range; without it γ runs below the parallel
    /// feasibility bound of each λ.
    #[arg(long, requires = "gamma_hi")]
    pub gamma_lo: Option<f64>,
    #[arg(long, requires = "gamma_lo")]
    pub gamma_hi: Option<f64>,
    #[arg(long, default_value_t = 40)]
    pub gamma_count: usize,
    /// Comma-separated linking costs.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub c: Vec<f64>,
    #[arg(long = "d", default_value_t = 1.0)]
    pub d: f64,
    /// Cells within this many grid steps of a boundary are not scored.
    #[arg(long, default_value_t = 2.0)]
    pub boundary_steps: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write the reconciliation report as JSON to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HeteroArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub hetero: HeteroFlags,
    /// Grid points per monotonicity scan.
    #[arg(long, default_value_t = 50)]
    pub scan_points: usize,
    /// Also estimate payoffs by simulation with this many samples.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
