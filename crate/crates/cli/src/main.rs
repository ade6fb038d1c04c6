//! `scribblekit` command-line tool.
//!
//! Exit codes: 0 on success, 1 on runtime failure (including a failed
//! gradient check), 2 on usage errors, missing inputs or malformed configs.

mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scribblekit::io::KitConfig;
use scribblekit::trainer::TrainConfig;

use settings::{ConfigArgs, UsageError};

#[derive(Debug, Parser)]
#[command(name = "scribblekit", version, about = "Scribble-supervised saliency losses, metrics and training demos")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare analytic and finite-difference gradients of every loss.
    Gradcheck(commands::gradcheck::Args),
    /// Print each loss term for one image, mask, feature field and prediction.
    LossEval(commands::loss_eval::Args),
    /// Score a directory of predictions against ground truth as CSV.
    Metrics(commands::metrics::Args),
    /// Compare affinity-loss descent with the spectral normalized cut.
    NcutCompare(commands::ncut::Args),
    /// Write the synthetic benchmark to disk.
    SynthGen(commands::synth::Args),
    /// Train a saliency head on the synthetic benchmark.
    TrainDemo(commands::train::Args),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    // Resolved for every command so a malformed config is always reported.
    let base = match cli.command {
        Command::TrainDemo(_) => KitConfig {
            train: TrainConfig::desk_benchmark(),
            ..KitConfig::default()
        },
        _ => KitConfig::default(),
    };
    let cfg = cli.config.resolve(base)?;
    match cli.command {
        Command::Gradcheck(args) => commands::gradcheck::run(&args),
        Command::LossEval(args) => commands::loss_eval::run(&args, &cfg),
        Command::Metrics(args) => commands::metrics::run(&args),
        Command::NcutCompare(args) => commands::ncut::run(&args),
        Command::SynthGen(args) => commands::synth::run(&args),
        Command::TrainDemo(args) => commands::train::run(&args, cfg),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|cause| {
        cause.is::<UsageError>() || matches!(cause.downcast_ref(), Some(scribblekit::Error::Config { .. }))
    });
    if usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
