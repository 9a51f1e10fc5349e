use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gbc_cli::{run, Cli, CliError, RunConfig, EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE};

fn execute(cfg: &RunConfig) -> Result<bool, CliError> {
    let report = run(cfg)?;
    let text = report.render();
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    for c in report.checks.iter().filter(|c| !c.passed()) {
        eprintln!("{}", c.line());
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: --threads must be a positive integer");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    let cfg = match RunConfig::from_command(cli.command) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match execute(&cfg) {
        Ok(true) => ExitCode::from(EXIT_OK as u8),
        Ok(false) => ExitCode::from(EXIT_TOLERANCE as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
