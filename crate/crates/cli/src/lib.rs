//! The `bdiv` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod bench;
mod commands;
pub mod manifest;
pub mod verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NotConverged(String),
    Invariant(String),
}

impl CliError {
    pub fn from_core(e: bdiv::Error) -> Self {
        match e {
            bdiv::Error::Format(_) | bdiv::Error::NonFinite { .. } => CliError::Invariant(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{what}: {m}")),
            CliError::NotConverged(m) => CliError::NotConverged(format!("{what}: {m}")),
            CliError::Invariant(m) => CliError::Invariant(format!("{what}: {m}")),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<bdiv::Error> for CliError {
    fn from(e: bdiv::Error) -> Self {
        CliError::from_core(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "bdiv", version, about = "Bounded solutions of div u = f on uniform grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a data field.
    Gen(GenArgs),
    /// Solve div u = f for a field file.
    Solve(SolveArgs),
    /// Print norms of a field file as JSON.
    Norms(NormsArgs),
    /// Benchmarks.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
    /// Run the seeded invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Nirenberg,
    Ball,
    Tatar,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Gaussian,
    Spikes,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Cells per axis.
    #[arg(long)]
    pub n: usize,
    /// Output file; for tatar this receives f.
    #[arg(long)]
    pub out: PathBuf,
    /// Second output of tatar (g); defaults to `<name>_g.<ext>` next to `out`.
    #[arg(long)]
    pub out_g: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 12)]
    pub levels: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = Law::Gaussian)]
    pub law: Law,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Periodic grid for random fields.
    #[arg(long)]
    pub periodic: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Onestep2d,
    Disjoint2d,
    Inductive,
    Weakl2,
    Helmholtz,
    Twostep,
    HierP2,
    HierP1,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub input: PathBuf,
    /// Prefix of the output files (`<out>.u0.bdiv`, ...).
    #[arg(long)]
    pub out: PathBuf,
    /// Strip threshold for weakl2.
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    /// Pass limit for weakl2.
    #[arg(long, default_value_t = bdiv::explicit::DEFAULT_MAX_ITER)]
    pub max_passes: usize,
    /// Fixed lambda of hier-p1, or lambda_1 of hier-p2.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Closure constant for hier-p2 (estimated when absent).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Assumed solution constant for hier-p1 (Helmholtz ratio when absent).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Maximum hierarchy levels.
    #[arg(long, default_value_t = 20)]
    pub levels: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub stop_residual: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_objective: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tol_residual: f64,
    /// Continuum symbol for helmholtz (div u = f then holds only approximately).
    #[arg(long)]
    pub continuum: bool,
    /// Reject data with nonzero mean instead of projecting it out.
    #[arg(long)]
    pub strict_mean: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Norms to evaluate: lp:P, linf, lorentz:P:Q, weak:P, morrey, tv, tv-aniso.
    /// Default: L1, L2, L^d, Linf, L(d,1), weak L^d, TV, plus Morrey up to 4096 cells.
    #[arg(long = "kind")]
    pub kinds: Vec<String>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Helmholtz and two-step ratios on the Nirenberg data.
    Table1 {
        /// Comma-separated grid sizes from {50,100,200,400,800}.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        grids: Vec<String>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-7)]
        tol_objective: f64,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Restrict to these modules.
    #[arg(long = "module", value_enum)]
    pub modules: Vec<verify::Module>,
    /// Field files to decode and check.
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let words = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match commands::dispatch(cli.command, words) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
