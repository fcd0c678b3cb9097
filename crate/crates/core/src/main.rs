use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use fuchsian_euler::harness::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli).context("fuchsian-euler failed") {
        Ok(outcome) => {
            // A closed pipe on stdout must not turn a finished run into a panic.
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", outcome.summary);
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            if !outcome.pass {
                eprintln!("verdict: FAIL");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
