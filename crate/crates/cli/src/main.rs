//! Command-line entry point. Parses arguments, sets up the thread pool and
//! maps outcomes to exit codes: 0 success, 2 partial success (skipped grid
//! cells), 1 fatal error, 64 usage error.

mod args;
mod run;

use clap::Parser;

use args::{Cli, Command};
use run::{CliError, EXIT_FATAL, EXIT_USAGE};

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };

    if let Some(threads) = cli.threads {
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let result = match &cli.command {
        Command::Sweep(args) => run::cmd_sweep(args, cli.verbose),
        Command::Weights(args) => run::cmd_weights(args, cli.verbose),
        Command::Roc(args) => run::cmd_roc(args, cli.verbose),
        Command::Scores(args) => run::cmd_scores(args, cli.verbose),
        Command::Synth(args) => run::cmd_synth(args, cli.verbose),
        Command::Saturate(args) => run::cmd_saturate(args, cli.verbose),
    };

    match result {
        Ok(code) => code,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            eprintln!("run 'tiltsweep --help' for usage");
            EXIT_USAGE
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_FATAL
        }
    }
}
