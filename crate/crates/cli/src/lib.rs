//! Command-line driver: phantom generation, detection runs, threshold
//! calibration and evaluation against references.

pub mod args;
pub mod commands;
pub mod config;
pub mod formats;
pub mod plots;

use args::{Cli, Command};
use commands::Failure;

/// Run a parsed command line and return the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let outcome: Result<(), Failure> = match &cli.command {
        Command::Phantom(a) => commands::phantom(a),
        Command::Run(a) => commands::run(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Report(a) => commands::report(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("restphase: {f}");
            f.exit_code()
        }
    }
}
