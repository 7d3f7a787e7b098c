mod cli;
mod run;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};

/// Caps the worker pool when `CLAIRVOYANT_THREADS` is set.
fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CLAIRVOYANT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CLAIRVOYANT_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let res = match &cli.command {
        Command::Gen(a) => run::gen(a),
        Command::Train(a) => run::train(a),
        Command::Eval(a) => run::eval(a),
        Command::Ledger(a) => run::ledger(a),
        Command::Render(a) => run::render(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
