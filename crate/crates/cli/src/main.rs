use std::process::ExitCode;

use clap::Parser;
use smallscat_cli::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    ExitCode::from(smallscat_cli::run(&cli))
}
