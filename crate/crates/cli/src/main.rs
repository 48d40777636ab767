use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use reinsim_cli::{analyze, load_plan, run, CliError, OutputPaths};
use reinsim_core::SamplingScheme;

#[derive(Parser)]
#[command(
    name = "reinsim",
    version,
    about = "Importance-sampled reinsurance loss simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and write the results and k-sweep tables.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sweep_out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<SamplingScheme>,
        /// Write the year loss table of the first k value.
        #[arg(long)]
        dump_ylt: Option<PathBuf>,
    },
    /// Validate a configuration without running it.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the variance gap of every configured k by quadrature.
    Analyze {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<SamplingScheme, String> {
    s.parse()
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            out,
            sweep_out,
            seed,
            trials,
            mode,
            dump_ylt,
        } => {
            let mut plan = load_plan(&config)?;
            if let Some(seed) = seed {
                plan.mode.seed = seed;
            }
            if let Some(trials) = trials {
                plan.num_trials = trials;
            }
            if let Some(scheme) = mode {
                plan.mode.scheme = scheme;
            }
            run(
                &plan,
                &OutputPaths {
                    results: out,
                    sweep: sweep_out,
                    year_table: dump_ylt,
                },
            )?;
        }
        Command::Check { config } => {
            let plan = load_plan(&config)?;
            plan.validate()?;
            println!(
                "{}: ok ({} trials, {} k values, {} contracts)",
                config.display(),
                plan.num_trials,
                plan.k_values.len(),
                plan.contracts.len()
            );
        }
        Command::Analyze { config } => {
            let plan = load_plan(&config)?;
            print!("{}", analyze(&plan)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
