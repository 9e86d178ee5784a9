mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use unilasso::{Error, ErrorKind};

use args::{Cli, Command};

fn exit_code(err: &Error) -> u8 {
    match err.kind() {
        ErrorKind::Io => 2,
        ErrorKind::Validation => 3,
        ErrorKind::Numerical => 4,
    }
}

fn dispatch(command: &Command) -> unilasso::Result<()> {
    match command {
        Command::Fit(a) => commands::fit::run(a),
        Command::Cv(a) => commands::cv::run(a),
        Command::Predict(a) => commands::predict::run(a),
        Command::Unireg(a) => commands::unireg::run(a),
        Command::Polish(a) => commands::polish::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Verify(a) => commands::verify::run(a),
        Command::Bench(a) => commands::bench::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(3);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
