use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sqzmirror::cli::{self, CliError, Model, Overrides, PhaseArg, Scenario};

#[derive(Parser)]
#[command(
    name = "sqzmirror",
    version,
    about = "Squeezed-reservoir mirror entanglement simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV files plus a manifest.
    Run {
        #[command(flatten)]
        common: Common,
        /// Worker threads for independent curves and sweep points.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the fully resolved configuration of a scenario.
    Config {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// fig2a, fig2b, fig2c, fig2d, fig3a, fig3b, fig4a, fig4b, figS1, figS2 or custom.
    scenario: Scenario,
    /// TOML config overlaid on the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a parameter (Hz, W, K) or grid.t_end / grid.step_ratio / grid.samples.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// reduced3, reduced10, reduced_analytic or full6; repeatable.
    #[arg(long = "model")]
    models: Vec<Model>,
    /// Steady-state phase: +1, -1 or average.
    #[arg(long, allow_hyphen_values = true)]
    phase: Option<PhaseArg>,
    /// Output directory; takes precedence over SQZ_OUTPUT_DIR and the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(self) -> Result<cli::RunConfig, CliError> {
        let overrides = Overrides {
            sets: self.sets,
            models: self.models,
            phase: self.phase,
            out: self.out,
        };
        cli::load(self.scenario, self.config.as_deref(), &overrides)
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let result = match args.command {
        Command::Run { common, jobs } => common.resolve().and_then(|cfg| cli::run(&cfg, jobs)).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
        }),
        Command::Config { common } => common.resolve().map(|cfg| print!("{}", cfg.manifest())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
