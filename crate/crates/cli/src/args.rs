use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phdae_core::estimator::IndicatorVariant;

#[derive(Debug, Parser)]
#[command(name = "phdae", version, about = "Goal-oriented adaptive time integration of port-Hamiltonian DAEs")]
pub struct Cli {
    /// Worker thread cap (falls back to PHDAE_THREADS, then all cores).
    #[arg(long, global = true, env = "PHDAE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uniform dG(0) solve with the trajectory of the local energy residuals.
    Solve(SolveArgs),
    /// Goal-oriented adaptive refinement loop.
    Adapt(AdaptArgs),
    /// Goal value against N on uniform grids, optionally along an adaptive run.
    Converge(ConvergeArgs),
    /// Interval counts needed by uniform and adaptive grids to reach each target.
    Cost(CostArgs),
    /// Effectivity indices against a fine uniform reference.
    Effectivity(EffectivityArgs),
    /// Marked-set stabilization of the Jacobi adjoint along an adaptive run.
    JacobiStudy(JacobiArgs),
    /// Spectral radii of the adjoint amplification matrices on a uniform grid.
    Contraction(ContractionArgs),
    /// Node voltages on a uniform grid.
    Waveform(WaveformArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Adapt(_) => "adapt",
            Command::Converge(_) => "converge",
            Command::Cost(_) => "cost",
            Command::Effectivity(_) => "effectivity",
            Command::JacobiStudy(_) => "jacobi-study",
            Command::Contraction(_) => "contraction",
            Command::Waveform(_) => "waveform",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Solve(a) => &a.common,
            Command::Adapt(a) => &a.common,
            Command::Converge(a) => &a.common,
            Command::Cost(a) => &a.common,
            Command::Effectivity(a) => &a.common,
            Command::JacobiStudy(a) => &a.common,
            Command::Contraction(a) => &a.common,
            Command::Waveform(a) => &a.common,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// `academic`, `tline`, `tline-reg`, or a path to a model JSON file.
    #[arg(long)]
    pub model: String,
    /// Directory receiving every artifact and the manifest.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for the randomized pencil check during model validation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct Refinement {
    /// Dörfler bulk parameter.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Weight of the state-energy term added to the goal.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    /// Intervals of the initial uniform grid.
    #[arg(long = "n", default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 60)]
    pub max_iter: usize,
    /// Interval cap; the default depends on the command.
    #[arg(long)]
    pub max_n: Option<usize>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// Use the block Jacobi adjoint with this many sweeps instead of the direct recursion.
    #[arg(long)]
    pub sweeps: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Full,
    Simplified,
}

impl From<Variant> for IndicatorVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Full => IndicatorVariant::Full,
            Variant::Simplified => IndicatorVariant::Simplified,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "n", default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub refine: Refinement,
    /// Stop once the estimated goal error is at or below this.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    /// Stop once the goal value itself is at or below this.
    #[arg(long)]
    pub target: Option<f64>,
    /// Uniform reference grid for effectivity indices in the run record.
    #[arg(long)]
    pub n_ref: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Uniform interval counts.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800,1600,3200")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    /// Also record one adaptive run.
    #[arg(long)]
    pub adaptive: bool,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 50)]
    pub initial_n: usize,
    #[arg(long, default_value_t = 3200)]
    pub max_n: usize,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub refine: Refinement,
    /// Decreasing goal-value targets.
    #[arg(long, value_delimiter = ',', default_value = "1e2,1e1,1e0,1e-1,1e-2")]
    pub targets: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct EffectivityArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub refine: Refinement,
    /// Intervals of the uniform reference grid.
    #[arg(long, default_value_t = 50_000)]
    pub n_ref: usize,
}

#[derive(Debug, Args)]
pub struct JacobiArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub refine: Refinement,
}

#[derive(Debug, Args)]
pub struct ContractionArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "n", default_value_t = 50)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct WaveformArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "n", default_value_t = 2000)]
    pub n: usize,
    /// State indices to record; defaults to five evenly spaced line nodes for the builtin lines.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Vec<usize>,
}
