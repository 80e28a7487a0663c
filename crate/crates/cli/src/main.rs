//! `rppg`: heart rate from video, cohort evaluation, synthetic scenes and
//! model curves.

mod biophys;
mod config;
mod estimate;
mod evaluate;
mod fail;
mod output;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::fail::exit_code;

#[derive(Debug, Parser)]
#[command(name = "rppg", version, about = "Remote photoplethysmography toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate heart rate from a frame sequence and landmark sidecar.
    Estimate(estimate::Args),
    /// Score estimate reports against ground truth, per cohort.
    Evaluate(evaluate::Args),
    /// Render a synthetic scene with known heart rate.
    Synth(synth::Args),
    /// Write signal-strength and camera-SNR curves.
    Biophys(biophys::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => estimate::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Synth(args) => synth::run(args),
        Command::Biophys(args) => biophys::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
