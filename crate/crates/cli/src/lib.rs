//! Command-line front end for `rotom-core`.
//!
//! Exit codes: 0 success, 1 other failure, 2 robot-file schema violation,
//! 3 zero force, 4 singular mass matrix, 5 degenerate ellipsoid.

pub mod args;
pub mod commands;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::run;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rotom_core::Error),
    #[error("{0}")]
    Arg(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rotom_core::Error as E;
        match self {
            CliError::Core(E::Schema(_)) => 2,
            CliError::Core(E::ZeroForce) => 3,
            CliError::Core(E::SingularMassMatrix { .. }) => 4,
            CliError::Core(E::DegenerateEllipsoid { .. }) => 5,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "rotom",
    version,
    about = "Force transmissibility at the center of mass of serial chains"
)]
pub struct Cli {
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Output format (default: json; csv for sweep).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Read angle inputs in degrees. Output angles are always radians.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a robot description file.
    Describe { robot: PathBuf },
    /// RoToM, fictitious force, reaction and CoM acceleration at one configuration.
    Eval {
        robot: PathBuf,
        /// Joint angles, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        /// Force at the CoM, one component per task dimension.
        #[arg(long, allow_hyphen_values = true)]
        force: String,
    },
    /// Transmissibility ellipsoid and index at one configuration.
    Ellipsoid {
        robot: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        /// Also emit N boundary points.
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
    },
    /// RoToM or transmissibility index over a grid of one or two joints.
    Sweep {
        robot: PathBuf,
        /// Swept joint, 1-based; repeat for a 2-D grid.
        #[arg(long = "joint", required = true)]
        joints: Vec<usize>,
        /// lo:hi:n, inclusive; one per swept joint, or one shared by both.
        #[arg(long = "range", required = true, allow_hyphen_values = true)]
        ranges: Vec<String>,
        /// Emit RoToM for this force.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "index")]
        force: Option<String>,
        /// Emit the transmissibility index.
        #[arg(long)]
        index: bool,
        /// Angles of the joints that are not swept (default all zero).
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
    },
    /// Gradient descent of the RoToM.
    Minimize {
        robot: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        q0: String,
        #[arg(long, allow_hyphen_values = true)]
        force: String,
        #[command(flatten)]
        descent: DescentArgs,
    },
    /// Multistart search for zero-RoToM configurations.
    Zeros {
        robot: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        force: String,
        #[command(flatten)]
        search: ZeroArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DescentArgs {
    #[arg(long, default_value_t = 1.0)]
    pub gain: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub step_size: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub fd_step: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub objective_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ZeroArgs {
    #[arg(long, default_value_t = 8)]
    pub seeds_per_joint: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dedupe_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_newton_iters: usize,
}

/// Thread pool capped by `ROTOM_THREADS` (unset or 0: one thread per core).
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var("ROTOM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Arg(format!("ROTOM_THREADS=`{v}` is not a count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Arg(e.to_string()))
}
