use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use conecusp::harness::{self, RunConfig, Subcommand};
use conecusp::LabError;

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    SpecialFn,
    Curvature,
    SolveDisk,
    Sweep,
    Energy,
    Rescale,
    Cylinder,
    All,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::SpecialFn => Subcommand::SpecialFn,
            Command::Curvature => Subcommand::Curvature,
            Command::SolveDisk => Subcommand::SolveDisk,
            Command::Sweep => Subcommand::Sweep,
            Command::Energy => Subcommand::Energy,
            Command::Rescale => Subcommand::Rescale,
            Command::Cylinder => Subcommand::Cylinder,
            Command::All => Subcommand::All,
        }
    }
}

/// Numerical checks for conic and cusp Kähler-Einstein metrics near a divisor.
///
/// Exit status: 0 when every check passes, 1 when a check fails (reports are still
/// written), 2 on a configuration error.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML file with per-subcommand sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated, strictly decreasing cone angles in (0, 1).
    #[arg(long)]
    beta_ladder: Option<String>,
    /// Solver grid size.
    #[arg(long)]
    grid: Option<usize>,
}

fn config(cli: &Cli) -> Result<RunConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(l) = &cli.beta_ladder {
        cfg.override_ladder(cli.command.into(), &harness::parse_ladder(l)?)?;
    }
    if let Some(g) = cli.grid {
        cfg.override_grid(g)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("conecusp: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli.out.clone().unwrap_or_else(harness::default_out_dir);
    match harness::run(cli.command.into(), &cfg, &out) {
        Ok(report) => {
            print!("{}", harness::summary(&report));
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(LabError::Config(msg)) => {
            eprintln!("conecusp: invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("conecusp: {e}");
            ExitCode::from(1)
        }
    }
}
