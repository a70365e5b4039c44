//! Configuration-driven front end: one JSON job in, a report and meshes out.

pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use gaussflux::nullcurve::NullError;
use gaussflux::periodsolver::SolveError;
use gaussflux::surface::SurfaceError;
use gaussflux::Error;

pub use commands::{Command, Job, Overrides};
pub use config::JobConfig;
pub use report::{RunReport, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Config(_) | CliError::Io(_) => Status::ConfigError,
            CliError::Check(_) => Status::CheckFailed,
            CliError::Solver(_) => Status::SolverFailure,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::TargetOutsideSpan { .. }
            | SolveError::DimensionMismatch(_)
            | SolveError::NotNowhereFlat { .. } => CliError::Config(e.to_string()),
            SolveError::Null(n) => n.into(),
            e => CliError::Solver(e.to_string()),
        }
    }
}

impl From<NullError> for CliError {
    fn from(e: NullError) -> Self {
        match e {
            NullError::LiftAmbiguous { .. }
            | NullError::SolverFailed(_)
            | NullError::ClassMismatch { .. }
            | NullError::Holo(_) => CliError::Solver(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::RealPeriodsNonzero { .. }
            | SurfaceError::ComplexPeriodsNonzero { .. }
            | SurfaceError::ExactnessFailed(_)
            | SurfaceError::ZeroInDomain { .. }
            | SurfaceError::DegenerateCell { .. } => CliError::Check(e.to_string()),
            SurfaceError::InvalidGrid(_)
            | SurfaceError::NotThreeDimensional(_)
            | SurfaceError::Geometry(_) => CliError::Config(e.to_string()),
            SurfaceError::Io(s) => CliError::Io(s),
            SurfaceError::Solve(s) => s.into(),
            SurfaceError::Null(n) => n.into(),
            e => CliError::Solver(e.to_string()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solve(s) => s.into(),
            Error::Null(n) => n.into(),
            Error::Surface(s) => s.into(),
            Error::Geometry(_) | Error::Expr(_) => CliError::Config(e.to_string()),
            Error::Holo(_) => CliError::Solver(e.to_string()),
        }
    }
}

impl From<gaussflux::holomorphic::HoloError> for CliError {
    fn from(e: gaussflux::holomorphic::HoloError) -> Self {
        Error::from(e).into()
    }
}

impl From<gaussflux::geometry::GeometryError> for CliError {
    fn from(e: gaussflux::geometry::GeometryError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Loads the config, runs the command and writes everything into `out`.
/// Errors still produce a `report.json` when `out` is writable.
pub fn execute(
    command: Command,
    config_path: &Path,
    out: &Path,
    overrides: &Overrides,
) -> RunReport {
    let name = command.name();
    let config = match JobConfig::load(config_path) {
        Ok(c) => overrides.apply(c),
        Err(e) => {
            let report = report::failure_report(name, &JobConfig::default(), &e);
            let _ = report::write_report(&report, out);
            return report;
        }
    };
    let base_dir = config_path.parent().map(PathBuf::from).unwrap_or_default();
    let job = Job::new(config, base_dir, overrides.seed);
    match commands::run(command, &job, out) {
        Ok(r) => r,
        Err(e) => {
            let report = report::failure_report(name, &job.config, &e);
            let _ = report::write_report(&report, out);
            report
        }
    }
}
