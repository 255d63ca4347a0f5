//! Batch runner: executes a scenario config or validates it.
//!
//! Exit codes: 0 success, 2 validation/config error, 3 numerical failure
//! (non-convergence, empty certificate, soundness violation), 4 i/o error.

use clap::{Parser, Subcommand};
use ringcap::scenario::{self, RunOptions, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ringcap", version, about = "ring-condenser bounds and certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its outputs.
    Run {
        /// Path to the scenario TOML file.
        config: PathBuf,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap on worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Progress notes on stderr.
        #[arg(long)]
        verbose: bool,
    },
    /// Parse and validate a scenario config without computing.
    Validate {
        config: PathBuf,
    },
    /// List the available tasks.
    Tasks,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> ringcap::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            verbose,
        } => {
            if let Some(jobs) = jobs {
                // ignore failure: the pool may already exist in-process
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs.max(1))
                    .build_global();
            }
            let opts = RunOptions {
                out_dir: out,
                verbose,
            };
            let outcome = scenario::run_scenario_file(&config, &opts)?;
            if verbose {
                eprintln!("task {} complete", outcome.task);
            }
            for path in &outcome.outputs {
                println!("{}", path.display());
            }
            println!("{}", outcome.manifest_path.display());
            Ok(())
        }
        Command::Validate { config } => {
            let (scenario, base) = Scenario::load(&config)?;
            scenario::validate_scenario(&scenario, &base)?;
            println!("ok: task {}", scenario.task);
            Ok(())
        }
        Command::Tasks => {
            for def in scenario::tasks::registry().values() {
                println!("{:<18} {}", def.name, def.summary);
            }
            Ok(())
        }
    }
}
