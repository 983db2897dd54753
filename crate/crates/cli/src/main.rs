use std::process::ExitCode;

use clap::Parser;
use vancal_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("VANCAL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("vancal: cannot size the thread pool: {e}");
        }
    }
    let output = match run(&cli.command) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("vancal: {e}");
            return ExitCode::from(2);
        }
    };
    let text = output.render();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("vancal: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if let vancal_cli::commands::Output::Report(r) = &output {
        for c in r.checks.iter().filter(|c| c.status == vancal_cli::report::Status::Fail) {
            eprintln!("vancal: check {} failed: measured {:e}, threshold {:e}", c.name, c.measured, c.threshold);
        }
        if let Some(msg) = r.parameters.get("error") {
            eprintln!("vancal: {msg}");
        }
    }
    if output.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
