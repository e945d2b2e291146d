use std::process::ExitCode;

use clap::Parser;
use flexstring::cli::{exit_code, run, Command};

fn main() -> ExitCode {
    let cmd = Command::parse();
    match run(&cmd) {
        Ok(report) => {
            println!("{}", report.summary());
            if cmd.verbose {
                for f in &report.files {
                    eprintln!("wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
