mod args;
mod commands;
mod failure;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use failure::Failure;

fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(Failure::config("threads must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("{}", f.line());
    ExitCode::from(f.kind.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let msg = e.kind().to_string();
            return fail(&Failure::config(msg));
        }
    };
    if let Err(f) = configure_threads(cli.threads) {
        return fail(&f);
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli.command, &args) {
        Ok(summary) => {
            println!("{}", serde_json::json!({ "status": "ok", "summary": summary }));
            ExitCode::SUCCESS
        }
        Err(f) => fail(&f),
    }
}
