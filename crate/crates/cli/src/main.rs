use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ledgermeet_cli::{execute, CliConfig, Command};

/// Run meeting scenarios, inspect ledgers, emit test vectors.
#[derive(Debug, Parser)]
#[command(name = "ledgermeet", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (run, goals).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Overrides the scenario seed, or the vector seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the transcript, report or vectors here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for persisted ledgers (run writes, inspect reads).
    #[arg(long)]
    persist: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = CliConfig {
        command: args.command,
        scenario_path: args.scenario,
        seed: args.seed,
        output_path: args.out,
        persist_dir: args.persist,
    };
    let code = execute(&config, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(u8::try_from(code).unwrap_or(2))
}
