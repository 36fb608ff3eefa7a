//! Command-line front end shared by the binary and its tests.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands;
use crate::ExitCode;

/// Information and energy flow in open qubit dynamics.
#[derive(Parser)]
#[command(name = "nmflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trajectory table and report.
    Run {
        config: PathBuf,
        /// Directory for relative output paths.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run every point of the scenario's [sweep] table.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the oracle and relation checks only.
    Verify { config: PathBuf },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Run { config, out_dir } => commands::run(config, out_dir, out, err),
        Command::Sweep { config, out_dir } => commands::sweep(config, out_dir, out),
        Command::Verify { config } => commands::verify(config, out, err),
    };
    match result {
        Ok(()) => ExitCode::Ok as i32,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code() as i32
        }
    }
}
