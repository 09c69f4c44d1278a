use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qel_core::perturbation::Route;

#[derive(Debug, Parser)]
#[command(name = "qel", version, about = "Quasi-entropy experiments on rotation/constant-gate programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace a potential along the in-place fast Walsh–Hadamard program.
    RunWht(TraceArgs),
    /// Synthesize a program for Id+εF and trace a potential along it.
    RunPerturbation(TraceArgs),
    /// Endpoint potentials of Id+εF over an (n, ε) grid.
    ScalingSweep(SweepArgs),
    /// Randomized campaign for the entropy-with-noise inequality.
    VerifyLemma(LemmaArgs),
    /// Randomized campaign for the per-rotation potential bound.
    VerifyTheorem2(Theorem2Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialKind {
    Plain,
    PrecondIdF,
    HatPq,
    KSlice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    AppendixB,
    Fast,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Route {
        match r {
            RouteArg::AppendixB => Route::AppendixB,
            RouteArg::Fast => Route::FastKronecker,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Dimension (power of two). Defaults: 8 for run-wht, 64 for run-perturbation.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2f64.powi(-6))]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = RouteArg::Fast)]
    pub route: RouteArg,
    /// Defaults: plain for run-wht, hat-pq for run-perturbation.
    #[arg(long, value_enum)]
    pub potential: Option<PotentialKind>,
    /// Matrix file with A_1, B_1, ..., A_k, B_k for `--potential k-slice`.
    #[arg(long)]
    pub slices: Option<PathBuf>,
    #[arg(long, default_value_t = qel_core::potential::DEFAULT_RECOMPUTE_EVERY)]
    pub recompute_every: usize,
    /// Emit only `step,potential`.
    #[arg(long)]
    pub plot_data: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256, 512, 1024, 2048, 4096])]
    pub n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625])]
    pub eps_grid: Vec<f64>,
    /// Largest allowed max/min ratio across n at fixed ε.
    #[arg(long, default_value_t = 4.0)]
    pub band: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long = "ell-grid", value_delimiter = ',', default_values_t = [64usize, 256, 1024, 4096, 65536])]
    pub ell_grid: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub instances: usize,
    #[arg(long = "c", default_value_t = qel_core::lemma::DEFAULT_C)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Theorem2Args {
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Gates per random program.
    #[arg(long, default_value_t = 10_000)]
    pub gates: usize,
    #[arg(long, default_value_t = 2)]
    pub programs: usize,
    #[arg(long, default_value_t = 2.0)]
    pub max_norm: f64,
    #[arg(long, default_value_t = qel_core::potential::DEFAULT_RECOMPUTE_EVERY)]
    pub recompute_every: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
