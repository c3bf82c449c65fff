//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 assertion failure or non-convergence, 2 bad config
//! or degenerate input, 3 deformation outside the admissible neighborhood.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Check;
pub use config::ExperimentSpec;

use crate::engine::verify::DEFAULT_SEED;
use crate::error::Error;

#[derive(Parser, Debug)]
#[command(name = "liouville", version, about = "Liouville currents, quasi-Fuchsian deformations and their checks")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for relative output paths.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Shuffles the order work is dispatched in; results do not depend on it.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Overrides `[params] tolerance`.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cross-ratio of four points and its principal logarithm.
    Cr {
        #[arg(num_args = 4, allow_negative_numbers = true, value_names = ["A", "B", "C", "D"])]
        points: Vec<String>,
    },
    /// Run one numerical check and write per-sample margins.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate the deformed current over the sampled isometries.
    Eval {
        #[command(flatten)]
        run: RunArgs,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OutsideNeighborhood(_) | Error::BranchViolation { .. } => 3,
        Error::ToleranceNotReached(_)
        | Error::NonConvergence { .. }
        | Error::QuadratureBudgetExceeded(_)
        | Error::InsufficientLevels { .. } => 1,
        _ => 2,
    }
}

fn load(args: &RunArgs) -> Result<commands::Run, Error> {
    let mut spec = ExperimentSpec::from_path(&args.config)?;
    if let Some(tol) = args.tolerance {
        if !(tol > 0.0) {
            return Err(Error::Config(format!("--tolerance {tol} must be positive")));
        }
        spec.params.tolerance = tol;
    }
    Ok(commands::Run { spec, out: args.out.clone(), seed: args.seed })
}

fn dispatch(command: Command) -> Result<i32, Error> {
    match command {
        Command::Cr { points } => {
            println!("{}", commands::cr_line(&points)?);
            Ok(0)
        }
        Command::Verify { check, run } => {
            let pass = commands::verify(&load(&run)?, check)?;
            println!("{} {}", check.name(), if pass { "PASS" } else { "FAIL" });
            Ok(if pass { 0 } else { 1 })
        }
        Command::Eval { run } => commands::eval(&load(&run)?),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
