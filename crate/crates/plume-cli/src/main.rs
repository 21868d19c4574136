use clap::{Parser, Subcommand};
use plume_cli::commands::{self, CliError};
use std::path::PathBuf;

/// Coupled groundwater flow and reactive pollutant transport on triangular
/// meshes: mixed finite elements for the flow, a flux-expanded mixed scheme
/// with velocity-dependent dispersion for the transport.
#[derive(Parser)]
#[command(name = "plume", version, about, long_about = None)]
struct Cli {
    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = "out")]
    output_dir: PathBuf,

    /// Seed for the randomized verification suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario file: flow solve, transport march, artifacts.
    Run {
        /// Scenario configuration file (`key = value` lines).
        config: PathBuf,
    },
    /// Flow convergence ladder on refinements of the scenario's structured mesh.
    DarcyStudy {
        /// Scenario configuration file; its mesh must be `structured:<n>`.
        config: PathBuf,
    },
    /// Run the built-in randomized self-checks.
    Verify {
        /// Only run suites whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let result: Result<String, CliError> = match &cli.command {
        Command::Run { config } => commands::cmd_run(config, &cli.output_dir),
        Command::DarcyStudy { config } => commands::cmd_darcy_study(config, &cli.output_dir),
        Command::Verify { filter } => commands::cmd_verify(cli.seed, filter.as_deref()),
    };
    match result {
        Ok(text) => print!("{text}"),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            std::process::exit(err.exit_code());
        }
    }
}
