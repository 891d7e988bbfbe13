//! `musielak`: condition checks, conjugates, moduli, norms and Morrey
//! verification for Musielak–Orlicz N-functions described by a JSON config.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Output, VerifyArgs};
use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "musielak", version, about)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides `tol` from the config.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Overrides `resolution` from the config.
    #[arg(long, global = true)]
    resolution: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the structural condition checks and print a JSON report.
    Check,
    /// Tabulate A, a, the conjugate pair and the Sobolev conjugate inverse as CSV.
    Conjugate {
        /// Comma-separated t grid.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Tabulate the Morrey modulus as CSV.
    Modulus {
        /// Comma-separated s grid.
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
    },
    /// Luxemburg norms of a sampled grid function and of its gradient.
    Norm {
        /// Grid-function expression in x1 .. xn.
        #[arg(long)]
        u: Option<String>,
    },
    /// Empirical Morrey bound check around a centre.
    Verify {
        #[arg(long)]
        u: Option<String>,
        /// Comma-separated centre coordinates.
        #[arg(long, value_delimiter = ',')]
        center: Option<Vec<f64>>,
        #[arg(long)]
        pairs: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".to_string()))?;
    let cfg = RunConfig::load(&path)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(commands::DEFAULT_SEED);
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
        }
    }
    let tol = cli.tol.or(cfg.tol);
    let resolution = cli.resolution.or(cfg.resolution);
    match cli.command {
        Command::Check => commands::check(&cfg, seed),
        Command::Conjugate { grid } => {
            commands::conjugate(&cfg, grid, tol.unwrap_or(commands::DEFAULT_TOL))
        }
        Command::Modulus { s } => commands::modulus(&cfg, s, tol.unwrap_or(commands::DEFAULT_TOL)),
        Command::Norm { u } => commands::norm(
            &cfg,
            u,
            resolution.unwrap_or(commands::NORM_RESOLUTION),
            tol.unwrap_or(musielak::modular::NORM_TOL),
        ),
        Command::Verify { u, center, pairs } => commands::verify(
            &cfg,
            VerifyArgs {
                u,
                center,
                pairs,
                resolution: resolution.unwrap_or(commands::VERIFY_RESOLUTION),
                seed,
                tol: tol.unwrap_or(commands::DEFAULT_TOL),
            },
        ),
    }
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.out.clone();
    let result = run(cli).and_then(|o| emit(out_path, &o.text).map(|_| o.passed));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
