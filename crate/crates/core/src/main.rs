use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use genspace::config::{self, ScenarioConfig};
use genspace::harness;
use genspace::Error;

#[derive(Parser)]
#[command(name = "genspace", version, about = "Frequency-as-aperture FMCW sensing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Architecture comparison table (frame multipliers, update rates, cost labels)
    Compare(Common),
    /// Build and validate the dual-polarization activation schedule
    Schedule(Common),
    /// Simulate beat signals and range profiles for every scheduled state
    Simulate(Common),
    /// Full acquisition, four-channel back-projection and scattering estimates
    Reconstruct(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    CaseStudy,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled scenario
    #[arg(long, value_enum, conflicts_with = "config")]
    preset: Option<Preset>,
    /// Parent directory for run outputs
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Overrides the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Also dump raw beat signals (simulate only)
    #[arg(long)]
    debug_signals: bool,
}

impl Common {
    fn scenario(&self) -> Result<Option<ScenarioConfig>, Error> {
        let cfg = match (&self.config, self.preset) {
            (Some(path), _) => Some(config::load_config(path)?),
            (None, Some(Preset::CaseStudy)) => Some(config::case_study()),
            (None, None) => None,
        };
        match (cfg, self.seed) {
            (Some(c), Some(seed)) => Ok(Some(c.with_seed(seed)?)),
            (cfg, _) => Ok(cfg),
        }
    }

    fn require(&self) -> Result<ScenarioConfig, Error> {
        self.scenario()?
            .ok_or_else(|| Error::Config(vec![genspace::FieldError::new("--config", "a scenario is required")]))
    }
}

fn run(cli: Cli) -> Result<PathBuf, Error> {
    match cli.command {
        Command::Compare(args) => {
            let cfg = args.scenario()?;
            let specs = harness::compare_specs(cfg.as_ref());
            let (table, _) = harness::compare_outputs(&specs)?;
            print!("{}", table.render_text());
            harness::execute("compare", "table", &args.out, || {
                harness::compare_outputs(&specs).map(|(_, out)| out)
            })
        }
        Command::Schedule(args) => {
            let cfg = args.require()?;
            harness::execute("schedule", &cfg.hash(), &args.out, || harness::schedule_outputs(&cfg))
        }
        Command::Simulate(args) => {
            let cfg = args.require()?;
            harness::execute("simulate", &cfg.hash(), &args.out, || {
                harness::simulate_outputs(&cfg, args.debug_signals)
            })
        }
        Command::Reconstruct(args) => {
            let cfg = args.require()?;
            harness::execute("reconstruct", &cfg.hash(), &args.out, || harness::reconstruct_outputs(&cfg))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
