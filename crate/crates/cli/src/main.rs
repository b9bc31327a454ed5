use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod io;
mod report;

/// Exit codes.
pub const OK: u8 = 0;
pub const VERDICT_FALSE: u8 = 1;
pub const INVALID: u8 = 2;
pub const NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "bfree", version, about = "B-free, interaction-free and decoherence-free subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the B-free subspace M, its chain, sectors and a state in it
    Subspace(SubspaceArgs),
    /// Compare full and free evolution of a state over a time grid
    Verify(VerifyArgs),
    /// Test whether the two generators share an eigenvector
    Shemesh(ShemeshArgs),
    /// The built-in reference models
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Args)]
struct ModelArg {
    /// Model file, or `catalog:NAME` for a built-in model
    #[arg(long)]
    model: String,
}

#[derive(Args)]
pub struct SubspaceArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Singular-value cutoff for rank decisions [default: automatic]
    #[arg(long, env = "BFREE_TOL")]
    tol: Option<f64>,
    /// Restrict the two-mode model to the N = n excitation eigenspace
    #[arg(long)]
    sector_n: Option<usize>,
    /// Report path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    model: ModelArg,
    /// State file, or `builtin:maximally_mixed` / `builtin:df`
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 101)]
    t_steps: usize,
    /// Pass threshold on every deviation [default: 1e-8]
    #[arg(long, env = "BFREE_TOL")]
    tol: Option<f64>,
    /// Report path; the CSV goes next to it with extension .csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ShemeshArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Largest power of each generator [default: n - 1]
    #[arg(long)]
    max_power: Option<usize>,
    /// Singular-value cutoff for rank decisions [default: automatic]
    #[arg(long, env = "BFREE_TOL")]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum CatalogAction {
    /// List the models with their default parameters
    List,
    /// Describe a model's generator and claims
    Show { name: String },
    /// Write a model file
    Export { name: String, path: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Subspace(args) => commands::subspace(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Shemesh(args) => commands::shemesh(&args),
        Command::Catalog { action } => commands::catalog(&action),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
