use std::process::ExitCode;

use clap::Parser;
use drinfeld_core::cli::{parse_config, render, run, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match parse_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = run(&cfg);
    print!("{}", render(&out));
    if let Some(path) = &args.json {
        if let Err(e) = std::fs::write(path, out.report.to_json()) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(out.exit_code as u8)
}
