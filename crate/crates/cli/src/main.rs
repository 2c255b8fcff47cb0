use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sparqlprov_cli::{execute, CliConfig};

fn main() -> ExitCode {
    let cfg = match CliConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (out, status) = execute(&cfg);
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(2);
    }
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sparqlprov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
