//! `slipstokes`: meshing, single solves, convergence studies, penalty sweeps
//! and boundary-approximation checks for the slip-boundary Stokes problem.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 solver
//! non-convergence (outputs are still written), 4 I/O error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slipstokes_core::analysis::AnalysisError;
use slipstokes_core::assembly::AssemblyError;
use slipstokes_core::mesh::MeshError;
use slipstokes_core::solver::SolverError;
use thiserror::Error;

use config::{CompareArg, DomainArg, Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Io(io) => CliError::Io(io.to_string()),
            AnalysisError::Csv(c) => CliError::Io(c.to_string()),
            AnalysisError::Mesh(m) => m.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AssemblyError> for CliError {
    fn from(e: AssemblyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "slipstokes",
    version,
    about = "Penalty slip-boundary Stokes solver on curved 2D domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a built-in disk mesh in Triangle format and print its statistics.
    Mesh {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rings: u64,
        #[arg(long, default_value_t = 0)]
        refine: usize,
        /// Output prefix; writes PREFIX.node and PREFIX.ele.
        #[arg(long)]
        out: PathBuf,
    },
    /// Single solve with error and boundary-slip report.
    Solve {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Error and rate table over a refinement sequence.
    Convergence {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_enum)]
        compare: Option<CompareArg>,
    },
    /// Condition number and iteration counts against the penalty parameter.
    EpsilonSweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated penalty values, e.g. `1,1e-2,1e-4`.
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
    },
    /// Boundary-approximation rates: distance, normals, surface integrals.
    GeometryCheck {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_enum)]
        domain: Option<DomainArg>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Mesh { rings, refine, out } => commands::mesh(rings as usize, refine, &out),
        Command::Solve { overrides } => commands::solve(RunConfig::resolve(&overrides)?),
        Command::Convergence { overrides, compare } => {
            let mut cfg = RunConfig::resolve(&overrides)?;
            if let Some(c) = compare {
                cfg.compare = c;
            }
            commands::convergence(cfg)
        }
        Command::EpsilonSweep {
            overrides,
            eps_list,
        } => {
            let mut cfg = RunConfig::resolve(&overrides)?;
            if eps_list.is_some() {
                cfg.eps_list = eps_list;
                cfg.validate()?;
            }
            commands::epsilon_sweep_cmd(cfg)
        }
        Command::GeometryCheck { overrides, domain } => {
            let mut cfg = RunConfig::resolve(&overrides)?;
            if let Some(d) = domain {
                cfg.geometry_domain.kind = d;
            }
            commands::geometry_check(cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
