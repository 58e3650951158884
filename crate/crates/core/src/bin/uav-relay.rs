use std::process::ExitCode;

use clap::Parser;
use uav_relay::cli::{run, Cli, SEED_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr());
    match run(cli, env_seed.as_deref(), &mut out, &mut err) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
