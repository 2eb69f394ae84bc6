//! Command-line front end for billiards in an ellipse and the Poncelet
//! grid: emits grid data and figures, phase portraits, string-construction
//! polylines, rotation numbers, and runs the verification suite.
//!
//! Exit codes: 0 all good, 2 configuration error, 3 computation or
//! verification failure.

mod checks;
mod commands;
mod config;
mod output;
mod report;

use clap::{Parser, Subcommand};
use commands::CmdError;
use config::{Overrides, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "poncelet",
    about = "Billiards in an ellipse: Poncelet grids, caustics, and invariant verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value config file (CLI flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Squared semi-major axis of the confocal family.
    #[arg(long, global = true)]
    a1sq: Option<f64>,

    /// Squared semi-minor axis of the confocal family.
    #[arg(long, global = true)]
    a2sq: Option<f64>,

    /// Family parameter of the billiard boundary.
    #[arg(long = "lambda-gamma", global = true, allow_negative_numbers = true)]
    lambda_gamma: Option<f64>,

    /// Number of polygon sides (odd).
    #[arg(long, global = true)]
    n: Option<u32>,

    /// Winding count of the polygon (coprime with n).
    #[arg(long, global = true)]
    k: Option<u32>,

    /// Chart offset of the first tangency point.
    #[arg(long, global = true, allow_negative_numbers = true)]
    x0: Option<f64>,

    /// Canonical chart quadrature panels.
    #[arg(long, global = true)]
    resolution: Option<usize>,

    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long = "out-dir", global = true)]
    out_dir: Option<PathBuf>,

    /// Comma-separated output formats: csv|json|svg.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Stretch factor making the outer ellipse non-confocal (negative
    /// control for the confocality and orthogonality checks).
    #[arg(long, global = true)]
    perturb: Option<f64>,

    /// Caustic parameter for rotnum/string (default: the (k, n) caustic).
    #[arg(long = "lambda-caustic", global = true, allow_negative_numbers = true)]
    lambda_caustic: Option<f64>,

    /// Comma-separated caustic parameters for the portrait.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambdas: Option<String>,

    /// Sample count for portraits and polylines.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Poncelet grid and emit CSV/JSON/SVG.
    Grid,
    /// Run the verification suite and write the report.
    Verify,
    /// Sample invariant curves of the billiard map in the (phi, p) chart.
    Portrait,
    /// Print the rotation number of a caustic/boundary pair.
    Rotnum,
    /// Emit the string-construction polyline.
    String,
}

fn build_config(cli: &Cli) -> Result<RunConfig, config::ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    let overrides = Overrides {
        a1sq: cli.a1sq,
        a2sq: cli.a2sq,
        lambda_gamma: cli.lambda_gamma,
        n: cli.n,
        k: cli.k,
        x0: cli.x0,
        resolution: cli.resolution,
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
        format: cli.format.clone(),
        perturb: cli.perturb,
        lambda_caustic: cli.lambda_caustic,
        lambdas: cli.lambdas.clone(),
        samples: cli.samples,
    };
    cfg.apply_overrides(&overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    let outcome: Result<(), CmdError> = match cli.command {
        Command::Grid => commands::cmd_grid(&cfg),
        Command::Portrait => commands::cmd_portrait(&cfg),
        Command::Rotnum => commands::cmd_rotnum(&cfg).map(|text| print!("{text}")),
        Command::String => commands::cmd_string(&cfg).map(|text| print!("{text}")),
        Command::Verify => match commands::cmd_verify(&cfg) {
            Ok((report, table)) => {
                print!("{table}");
                if report.passed() {
                    Ok(())
                } else {
                    return ExitCode::from(3);
                }
            }
            Err(e) => Err(e),
        },
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Computation(msg)) => {
            eprintln!("computation error: {msg}");
            ExitCode::from(3)
        }
        Err(CmdError::Io(msg)) => {
            eprintln!("io error: {msg}");
            ExitCode::from(3)
        }
    }
}
