use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use twocopy::cli::{render, run, RunConfig};

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            // --help and --version land here too
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(render(&outcome.document, cfg.format).as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
