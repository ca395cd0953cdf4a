//! `fitens`: seeded experiment runner for fitted ensembles, probability
//! rectification, SCL evaluation, and OOD-detection reporting.

mod config;
mod output;
mod run_cmd;
mod scl_cmd;
mod spaces_cmd;
mod validate_cmd;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "fitens", version, about = "Fitted-ensemble experiment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a superclass-space config file
    Spaces(spaces_cmd::SpacesArgs),
    /// Run the fitted-ensemble pipeline: train (or ingest), rectify, report
    Run(run_cmd::RunArgs),
    /// Run separable-concept-learning experiments
    Scl(scl_cmd::SclArgs),
    /// Check config and data files without running anything
    Validate(validate_cmd::ValidateArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spaces(args) => spaces_cmd::cmd_spaces(args),
        Command::Run(args) => run_cmd::cmd_run(args),
        Command::Scl(args) => scl_cmd::cmd_scl(args),
        Command::Validate(args) => validate_cmd::cmd_validate(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
