use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

mod args;
mod commands;
mod output;
mod svg;

use args::{Cli, Command};
use commands::Outcome;

pub(crate) fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Fit(a) => commands::fit::run(a, command),
        Command::Eval(a) => commands::eval::run(a),
        Command::Synth(a) => commands::synth::run(a, command),
        Command::Pose(a) => commands::pose::run(a, command),
        Command::Rerun(a) => commands::rerun::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NoResult) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
