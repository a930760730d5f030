use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use infomarket::cli::{run, RunOptions, Subcommand};
use infomarket::scenario::parse_grid;

#[derive(Debug, ClapSubcommand)]
enum Command {
    /// Equilibrium and cobweb stability per news type.
    Equilibrium(Common),
    /// Stable provider/consumer matching with marginal contributions.
    Match(Common),
    /// Round-robin tournament of the configured strategies.
    Game(Common),
    /// Plurality count.
    VoteFptp(Common),
    /// Meek STV count, one row per candidate per round.
    VoteMeek(Common),
    /// Retention decay and utility curves.
    Dynamics(Common),
    /// Market health over the reliability grid, before and after the change.
    Sweep(Common),
    /// Cheapest spread route through the edge-list graph.
    Path(Common),
}

impl Command {
    fn split(self) -> (Subcommand, Common) {
        match self {
            Command::Equilibrium(c) => (Subcommand::Equilibrium, c),
            Command::Match(c) => (Subcommand::Match, c),
            Command::Game(c) => (Subcommand::Game, c),
            Command::VoteFptp(c) => (Subcommand::VoteFptp, c),
            Command::VoteMeek(c) => (Subcommand::VoteMeek, c),
            Command::Dynamics(c) => (Subcommand::Dynamics, c),
            Command::Sweep(c) => (Subcommand::Sweep, c),
            Command::Path(c) => (Subcommand::Path, c),
        }
    }
}

/// Information-market simulator: runs one subcommand over a scenario file
/// and writes `<scenario>_<subcommand>.csv` into the output directory.
#[derive(Debug, Parser)]
#[command(name = "infomarket", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the analysis reliability grid, e.g. `0,0.25,0.5,0.75,1`.
    #[arg(long)]
    grid: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("INFOMARKET_LOG", "warn")).init();
    let (command, args) = Cli::parse().command.split();

    let grid = match args.grid.as_deref().map(parse_grid).transpose() {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let options = RunOptions { seed: args.seed, grid };
    match run(command, &args.scenario, &args.out, &options) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
