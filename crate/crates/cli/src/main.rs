use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sphermoments_cli::error::exit;
use sphermoments_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = err.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = run(&cli);
    let mut stdout = std::io::stdout().lock();
    if !outcome.stdout.is_empty() {
        let text = outcome.stdout.trim_end_matches('\n');
        if writeln!(stdout, "{text}").and_then(|_| stdout.flush()).is_err() {
            return ExitCode::from(exit::IO as u8);
        }
    }
    ExitCode::from(outcome.code as u8)
}
