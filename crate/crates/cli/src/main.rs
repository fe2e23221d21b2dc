mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

/// Random-to-random shuffles on linear extensions of finite posets.
#[derive(Parser, Debug)]
#[command(name = "linext", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
#[group(required = false, multiple = false)]
pub struct PosetSource {
    /// Inline poset JSON, e.g. '{"n":4,"covers":[[1,2],[3,4]]}'
    #[arg(long)]
    pub poset: Option<String>,
    /// File containing poset JSON
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Named family: antichain:n, chain:n, nshape:n,k, sumchains:a,b,...
    #[arg(long)]
    pub family: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Jsonl,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every random choice; drawn and printed when absent
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance for eigenvalue comparisons
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (written atomically); stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Spectrum of the random-to-random matrix against the bound
    Spectrum {
        #[command(flatten)]
        source: PosetSource,
        #[command(flatten)]
        common: Common,
    },
    /// Check every non-chain isomorphism class up to a size
    Survey {
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        /// Allow sizes above 6 and checkpoint progress next to --out
        #[arg(long)]
        long_running: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Exact mixing time and relaxation-time bounds
    Mix {
        #[command(flatten)]
        source: PosetSource,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// r2r, r2t, bd, bd-quadratic or transposition
        #[arg(long, default_value = "r2r")]
        chain: String,
        /// Start from the least extension instead of the worst case
        #[arg(long)]
        from_least: bool,
        /// Report the random-to-random and Bubley-Dyer chains side by side
        #[arg(long)]
        compare: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Mean mixing time of random posets by size
    Scaling {
        #[arg(long, default_value_t = 5)]
        n_from: usize,
        #[arg(long, default_value_t = 8)]
        n_to: usize,
        /// Posets per size
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Draw approximately uniform linear extensions
    Sample {
        #[command(flatten)]
        source: PosetSource,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Burn in with the relaxation time of the actual matrix
        #[arg(long, conflicts_with = "burn_in")]
        paranoid: bool,
        /// Fixed number of burn-in steps
        #[arg(long)]
        burn_in: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Rank-one certificate for the two-chain / N-shape pair
    Nshape {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Diameter of the move graph and sorting-path replay
    Diameter {
        #[command(flatten)]
        source: PosetSource,
        /// Check this many random pairs instead of all pairs
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Included pairs whose second eigenvalue increases
    Scan {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Every class of one size in inclusion order with its second eigenvalue
    Table {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Export a transition matrix
    Matrix {
        #[command(flatten)]
        source: PosetSource,
        #[arg(long, default_value = "r2r")]
        chain: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Violation(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<linext::Error> for CliError {
    fn from(e: linext::Error) -> Self {
        match e {
            linext::Error::NoConvergence(_) | linext::Error::Overflow => {
                CliError::Resource(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("linext: {e}");
            ExitCode::from(e.code())
        }
    }
}
