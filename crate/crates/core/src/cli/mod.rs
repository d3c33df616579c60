//! Command-line front end: argument parsing, dispatch and error reporting.

pub mod config;
pub mod io;
mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::LabError;

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "nonlocal-lab", version, about = "Numerical lab for the fractional p(x,y)-Laplacian")]
pub struct Cli {
    /// Run configuration (sectioned key = value file).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    Lebesgue,
    Gagliardo,
    Combined,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the discrete energy and write the solution.
    Solve,
    /// Modular and Luxemburg norm of a grid function on the domain.
    Norms {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "lebesgue")]
        kind: NormKind,
    },
    /// Regularity diagnostics for a solution CSV.
    Diagnose {
        #[arg(long)]
        input: PathBuf,
    },
    /// Tabulate the geometric level-set recursion.
    Iterate {
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        b: f64,
        /// Comma-separated, nonincreasing.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        betas: Vec<f64>,
        #[arg(long)]
        y0: f64,
        #[arg(long, default_value_t = 50)]
        jmax: usize,
    },
    /// Check the exponent conditions for a preset field.
    CheckExponent {
        #[arg(long)]
        preset: Option<String>,
        /// Value for the constant preset.
        #[arg(long)]
        value: Option<f64>,
        /// CSV table for the tabulated preset.
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
pub struct ErrorJson {
    pub code: String,
    pub field: Option<String>,
    pub message: String,
}

impl From<&LabError> for ErrorJson {
    fn from(e: &LabError) -> Self {
        ErrorJson {
            code: e.code().to_string(),
            field: e.field().map(str::to_string),
            message: e.to_string(),
        }
    }
}

/// Exit status when a hard assertion fails.
pub const EXIT_ASSERTION: i32 = 1;
/// Exit status when a module or configuration error occurs.
pub const EXIT_ERROR: i32 = 2;

/// Run a parsed command line, writing reports to `stdout` and errors (as
/// JSON) to `stderr`. Returns the process exit status.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run::dispatch(&cli, stdout) {
        Ok(true) => 0,
        Ok(false) => EXIT_ASSERTION,
        Err(e) => {
            let json = serde_json::to_string(&ErrorJson::from(&e)).expect("error json");
            let _ = writeln!(stderr, "{json}");
            EXIT_ERROR
        }
    }
}
