//! `minkit`: measurement-induced nonlocality from the command line.

mod commands;
mod detect;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minkit::min::{Measure, OptimizerConfig};

/// Exit codes consumed by scripts and CI.
pub mod exit {
    pub const AUDIT_FAILURE: u8 = 1;
    pub const MALFORMED_INPUT: u8 = 2;
    pub const INVARIANT_VIOLATION: u8 = 3;
    pub const DIMENSION_BOUND: u8 = 4;
}

#[derive(Parser, Debug)]
#[command(
    name = "minkit",
    version,
    about = "Measurement-induced nonlocality of bipartite quantum states"
)]
pub struct Cli {
    #[command(flatten)]
    pub opt: OptimizerArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OptimizerArgs {
    /// Sphere grid resolution G for qubit searches.
    #[arg(long, global = true, default_value_t = 64)]
    pub grid: usize,
    /// Number of restarts for sphere and block searches.
    #[arg(long, global = true, default_value_t = 4)]
    pub restarts: usize,
    /// Convergence tolerance of the local refinement.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Eigenvalue gap of the reduced state treated as a degeneracy.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub degeneracy_tol: f64,
}

impl OptimizerArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            sphere_grid: self.grid,
            restarts: self.restarts,
            tol: self.tol,
            seed: self.seed,
            degeneracy_tol: self.degeneracy_tol,
            ..Default::default()
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// MIN of a state read from a JSON file.
    Compute {
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = MeasureArg::N1)]
        measure: MeasureArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Level surface N1 = level over Bell-diagonal states.
    Surface {
        #[arg(long)]
        level: f64,
        #[arg(long, default_value_t = 41)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Region of Bell-diagonal states whose N1 is frozen under a flip channel.
    Region {
        #[arg(long, default_value_t = 3)]
        axis: usize,
        #[arg(long, default_value_t = 21)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// N1 and N2 of a Bell-diagonal state under flip-channel decoherence.
    Sweep {
        /// Initial correlations as c1,c2,c3.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        c0: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        axis: usize,
        #[arg(long, value_enum, default_value_t = SidedArg::One)]
        sided: SidedArg,
        /// Number of γt samples on [0, t-max].
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, default_value_t = 5.0)]
        t_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded audits of the closed forms and of monotonicity under channels.
    Audit {
        #[arg(value_enum)]
        kind: AuditKind,
        /// Random states for the oracle and relation audits.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Random states for the monotonicity audit.
        #[arg(long, default_value_t = 50)]
        states: usize,
        /// Random channels per state for the monotonicity audit.
        #[arg(long, default_value_t = 4)]
        channels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureArg {
    N1,
    N2,
    Nb,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::N1 => Measure::N1,
            MeasureArg::N2 => Measure::N2,
            MeasureArg::Nb => Measure::Nb,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Auto,
    Closed,
    Numeric,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SidedArg {
    One,
    Two,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    Monotonicity,
    Relations,
    Oracle,
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }
}

/// Library errors map onto the exit-code contract by kind.
impl From<minkit::Error> for Failure {
    fn from(e: minkit::Error) -> Self {
        use minkit::Error as E;
        let code = match e {
            E::DimensionBound(_) => exit::DIMENSION_BOUND,
            E::DimensionMismatch(_) | E::NotSquare(..) | E::InvalidConfig(_) => {
                exit::MALFORMED_INPUT
            }
            _ => exit::INVARIANT_VIOLATION,
        };
        Self::new(code, e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::new(exit::MALFORMED_INPUT, e)
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("MINKIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
