use std::process::ExitCode;

use clap::Parser;
use pulsenet_cli::{run, Cli, CliError};

fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var("PULSENET_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Invalid(format!("PULSENET_THREADS={v:?} is not a positive integer"))),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads().and_then(|n| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| CliError::Invalid(e.to_string()))?;
        pool.install(|| run(cli, &mut std::io::stdout().lock()))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pulsenet: {e}");
            e.exit_code()
        }
    }
}
