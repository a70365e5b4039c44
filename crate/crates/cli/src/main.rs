use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaussflux_cli::{execute, Command, Overrides, Status};

#[derive(Parser)]
#[command(
    name = "gaussflux",
    version,
    about = "Minimal surfaces with prescribed Gauss map and flux"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON job description.
    #[arg(long, global = true, default_value = "job.json")]
    config: PathBuf,
    /// Directory for the report and artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Grid resolution, overriding the config.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Conformality and Gauss residual tolerance, overriding the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for the random points of rank checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Lift, solve for the flux, integrate, verify and export.
    Synthesize,
    /// Check null data against a stored field or mesh.
    Verify,
    /// Sample a deformation family.
    Deform,
    /// Spinor class of three-dimensional null data.
    Classify,
    /// Spherical area of the Gauss map and the stability verdict.
    Area,
    /// Interval multiplier constructions on `[0, 1]`.
    SolveInterval,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Synthesize => Command::Synthesize,
            Cmd::Verify => Command::Verify,
            Cmd::Deform => Command::Deform,
            Cmd::Classify => Command::Classify,
            Cmd::Area => Command::Area,
            Cmd::SolveInterval => Command::SolveInterval,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        resolution: cli.resolution,
        tol: cli.tol,
        seed: cli.seed,
    };
    let report = execute(cli.command.into(), &cli.config, &cli.out, &overrides);
    match &report.error {
        Some(e) => eprintln!("{}: {e}", report.command),
        None => {
            for c in report.checks.iter().filter(|c| c.passed == Some(false)) {
                eprintln!(
                    "{}: check {} failed ({:?} > {:?})",
                    report.command, c.name, c.value, c.tolerance
                );
            }
        }
    }
    if report.status == Status::Pass {
        println!(
            "{}: pass ({})",
            report.command,
            cli.out.join("report.json").display()
        );
    }
    ExitCode::from(report.status.exit_code())
}
