use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tj_runner::{commands, exit, RunConfig, RunError};

#[derive(Parser, Debug)]
#[command(name = "triple-junction", version, about = "Triple junctions of the vector Allen-Cahn energy on the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults apply to every missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created when missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated ε values, strictly decreasing.
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Grid nodes per axis.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Heteroclinic profiles and surface tensions.
    Sigma,
    /// Young angles of the surface tensions.
    Angles,
    /// Minimize at each ε and write fields and reports.
    Solve,
    /// ε-sweep with fitted constants.
    Sweep,
    /// Closed-form and geometry checks.
    Verify,
}

fn load(cli: &Cli) -> Result<RunConfig, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(eps) = &cli.eps {
        cfg.epsilons = eps.clone();
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    let seed = cli.seed.unwrap_or(cfg.seed);
    let cfg = cfg.seeded(seed);
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String, RunError> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Sigma => commands::sigma(&cfg).map(|(_, msg)| msg),
        Command::Angles => commands::angles(&cfg),
        Command::Solve => commands::solve(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Verify => commands::verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(exit::USAGE as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
