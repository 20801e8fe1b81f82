//! Library side of the `mp` command-line tool: argument parsing, image and
//! CSV input, SVG output and the subcommands.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod raster;
pub mod svg;
pub mod table;

pub use args::{Cli, Command};
pub use config::{RunConfig, Settings};
pub use error::{CliError, CliResult};

/// Runs one parsed invocation and returns its stdout text.
pub fn execute(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Stipple(a) => commands::stipple(&Settings::resolve(a, false)?),
        Command::Lineart(a) => commands::lineart(&Settings::resolve(a, true)?),
        Command::Quantize(a) => commands::quantize(a),
        Command::W1(a) => commands::w1(a),
        Command::Rates(a) => commands::rates(a),
        Command::Gradcheck(a) => commands::gradcheck(a),
    }
}

/// Sizes the global thread pool from `MP_THREADS` when it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("MP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Validation(format!("MP_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}
