//! `halfspace`: batch front end for the half-space verifications.
//!
//! Every subcommand prints one JSON document (or CSV for ladders) to stdout
//! and, when an output path or the `HALFSPACE_OUTPUT_DIR` directory is
//! given, writes the same bytes to a file. Exit status: 0 success, 2 a
//! mathematical check failed, 1 usage or configuration error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use halfspace_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "halfspace",
    version,
    about = "Bubble, threshold and solver checks on the half-space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Space dimension N >= 3.
    #[arg(long, global = true, default_value_t = 4)]
    pub dim: u32,

    #[arg(long, global = true, default_value_t = 1.0)]
    pub lambda: f64,

    #[arg(long, global = true, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu: f64,

    /// Subcritical exponent, 2 < p < 2*.
    #[arg(long, global = true, default_value_t = 3.0)]
    pub p: f64,

    /// Comma-separated, strictly decreasing eps ladder.
    #[arg(long = "eps", global = true, value_delimiter = ',')]
    pub eps_ladder: Option<Vec<f64>>,

    #[arg(long, global = true, value_enum, default_value_t = MuModeArg::Fixed)]
    pub mu_mode: MuModeArg,

    /// Output file. Without it, `<HALFSPACE_OUTPUT_DIR>/<subcommand>.<format>`
    /// is written when the variable is set.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(
        long,
        global = true,
        env = "HALFSPACE_OUTPUT_DIR",
        hide_env_values = true
    )]
    pub output_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Relative tolerance of the half-space quadrature.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub rel_tol: f64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// K1, K2, K3, A and the identity K1 - K2 - K3 = 0.
    Constants,
    /// Weighted test-function totals along the ladder with expansion fits.
    Expansions,
    /// Margin A_lambda - sup_t g_eps along the ladder.
    Threshold,
    /// Unweighted bubble quotient and weighted test-function quotients.
    Quotient {
        /// Mixing parameter in (0, 1]; defaults to the bubble's own.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Mountain-pass candidate (or, for mu <= 0, descent plus the
    /// nonexistence certificate).
    Solve(SolveArgs),
    /// Pohozaev identities of a checkpointed field.
    Pohozaev {
        /// Checkpoint stem written by `solve --checkpoint`.
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
    /// Hardy inequality for the Gaussian and for random grid fields.
    Hardy {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// First weighted eigenvalue: Gaussian quotient and discrete minimum.
    Eigen {
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct GridArgs {
    /// Cells per direction.
    #[arg(long, default_value_t = 160)]
    pub cells: usize,
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 6.5)]
    pub grading: f64,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 5000)]
    pub max_outer: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 0.0125)]
    pub init_eps: f64,
    /// Also write the candidate as `<stem>.txt` + `<stem>.json`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuModeArg {
    Fixed,
    InverseSqrtEps,
}

/// Outcome of a subcommand: the rendered document and whether its checks
/// passed.
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidDimension(_)
            | Error::InvalidParameter(_)
            | Error::RegimeViolation(_)
            | Error::Checkpoint(_),
        ) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap exits 2 on usage errors; 2 is reserved for failed checks here
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli).and_then(|o| output::emit(&cli, &o).map(|_| o.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
