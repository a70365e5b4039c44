mod area;
mod classify;
mod deform;
mod interval;
mod synthesize;
mod verify;

use std::path::{Path, PathBuf};

use gaussflux::holomorphic::AnalyticFn;
use gaussflux::nullcurve::{gauss_map_from_null, rank_at, ComplexGaussMap};
use gaussflux::surface::{conformality_residual, gauss_residual, to_csv, to_obj};
use gaussflux::{
    CircularDomain, DomainGrid, ExpMultiplier, Holomorphic, ImmersionField, NullData, NullField,
    C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{DomainSpec, InputSpec, JobConfig};
use crate::report::{Recorder, RunReport};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synthesize,
    Verify,
    Deform,
    Classify,
    Area,
    SolveInterval,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synthesize => "synthesize",
            Command::Verify => "verify",
            Command::Deform => "deform",
            Command::Classify => "classify",
            Command::Area => "area",
            Command::SolveInterval => "solve-interval",
        }
    }
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub resolution: Option<usize>,
    /// Replaces the conformality and Gauss residual tolerance.
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Overrides {
    pub fn apply(&self, mut c: JobConfig) -> JobConfig {
        if let Some(r) = self.resolution {
            c.resolution = r;
        }
        if let Some(t) = self.tol {
            c.tolerances.residual = t;
        }
        c
    }
}

pub struct Job {
    pub config: JobConfig,
    /// Directory that relative paths in the config are resolved against.
    pub base_dir: PathBuf,
    pub seed: u64,
}

impl Job {
    pub fn new(config: JobConfig, base_dir: PathBuf, seed: u64) -> Self {
        Self {
            config,
            base_dir,
            seed,
        }
    }

    pub fn path(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn grid(&self, domain: &CircularDomain) -> Result<DomainGrid, CliError> {
        Ok(DomainGrid::build(
            domain,
            self.config.resolution,
            self.config.boundary_offset,
        )?)
    }

    pub fn integrate(
        &self,
        f: &dyn NullField,
        h: &dyn Holomorphic,
        grid: &DomainGrid,
    ) -> Result<ImmersionField, CliError> {
        let p0 = self
            .config
            .basepoint
            .unwrap_or_else(|| grid.nodes()[grid.len() / 2]);
        let base = vec![0.0; f.dim()];
        Ok(gaussflux::surface::integrate_immersion(
            f,
            h,
            grid,
            p0,
            &base,
            &self.config.solver.quad,
        )?)
    }

    /// Grid nodes plus `rank_samples` points drawn from the domain with the seed.
    pub fn rank_points(&self, domain: &CircularDomain, grid: &DomainGrid) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut pts = grid.nodes().to_vec();
        let mut added = 0;
        while added < self.config.rank_samples {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if domain.contains(z) && domain.boundary_distance(z) > self.config.boundary_offset {
                pts.push(z);
                added += 1;
            }
        }
        pts
    }
}

pub fn run(command: Command, job: &Job, out: &Path) -> Result<RunReport, CliError> {
    let mut rec = Recorder::new(command.name());
    match command {
        Command::Synthesize => synthesize::run(job, &mut rec)?,
        Command::Verify => verify::run(job, &mut rec)?,
        Command::Deform => deform::run(job, &mut rec)?,
        Command::Classify => classify::run(job, &mut rec)?,
        Command::Area => area::run(job, &mut rec)?,
        Command::SolveInterval => interval::run(job, &mut rec)?,
    }
    rec.finish(&job.config, out)
}

/// Dimension implied by the input, known before any computation.
fn input_dim(input: &InputSpec) -> Result<usize, CliError> {
    match input {
        InputSpec::Weierstrass { .. } | InputSpec::FlatClass { .. } => Ok(3),
        InputSpec::NullData { components } => Ok(components.len()),
    }
}

/// Immersion values with everything needed to rebuild the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDump {
    pub domain: DomainSpec,
    pub resolution: usize,
    pub boundary_offset: f64,
    pub basepoint: C64,
    pub base_value: Vec<f64>,
    pub multiplier: ExpMultiplier,
    pub values: Vec<Vec<f64>>,
}

impl FieldDump {
    fn new(job: &Job, x: &ImmersionField, h: &ExpMultiplier) -> Self {
        Self {
            domain: job.config.domain.clone(),
            resolution: x.grid.resolution(),
            boundary_offset: x.grid.boundary_offset(),
            basepoint: x.basepoint,
            base_value: x.base_value.clone(),
            multiplier: h.clone(),
            values: x.values.clone(),
        }
    }
}

/// `g = f₃ / (f₁ − i f₂)` when `f` has dimension 3 and `g` is finite.
enum Gauss {
    Map(Box<dyn Holomorphic>),
    Skipped(&'static str),
}

fn gauss_of(f: &NullData) -> Result<Gauss, CliError> {
    if f.dim() != 3 {
        return Ok(Gauss::Skipped("n≠3"));
    }
    Ok(match gauss_map_from_null(f)?.1 {
        Some(ComplexGaussMap::Map(g)) => Gauss::Map(Box::new(g)),
        _ => Gauss::Skipped("g ≡ ∞"),
    })
}

/// `λ g` for `g = exp(u)`.
fn scaled_exp(g: &ExpMultiplier, lambda: f64) -> Gauss {
    let g = g.clone();
    Gauss::Map(Box::new(AnalyticFn(move |z: C64| {
        let (u, du) = g.u.eval_with_derivative(z);
        let v = u.exp() * lambda;
        (v, du * v)
    })))
}

/// Conformality and Gauss-map checks on one field, with name suffix `tag`.
fn field_checks(
    job: &Job,
    rec: &mut Recorder,
    x: &ImmersionField,
    gauss: &Gauss,
    tag: &str,
) -> Result<(), CliError> {
    let tol = job.config.tolerances.residual;
    rec.check(
        &format!("conformality{tag}"),
        conformality_residual(x)?,
        tol,
    );
    match gauss {
        Gauss::Map(g) => {
            rec.check(&format!("gauss{tag}"), gauss_residual(x, g.as_ref())?, tol);
        }
        Gauss::Skipped(note) => rec.skip_check(&format!("gauss{tag}"), note),
    }
    Ok(())
}

/// OBJ for `n = 3`, CSV otherwise; returns the file name.
fn mesh_artifact(rec: &mut Recorder, stem: &str, x: &ImmersionField) -> Result<String, CliError> {
    let (name, text) = if x.dim() == 3 {
        (format!("{stem}.obj"), to_obj(x)?)
    } else {
        (format!("{stem}.csv"), to_csv(x))
    };
    rec.file(name.clone(), text);
    Ok(name)
}

fn rank_result(
    job: &Job,
    rec: &mut Recorder,
    f: &dyn NullField,
    domain: &CircularDomain,
    grid: &DomainGrid,
) -> Result<usize, CliError> {
    let (rank, sv) = rank_at(f, &job.rank_points(domain, grid))?;
    rec.result(
        "rank",
        serde_json::json!({ "rank": rank, "dim": f.dim(), "singular_values": sv }),
    );
    Ok(rank)
}

/// `min |h|` and `max |h|` over the grid.
fn modulus_range(h: &dyn Holomorphic, grid: &DomainGrid) -> Result<[f64; 2], CliError> {
    let mut r = [f64::INFINITY, 0.0f64];
    for z in grid.nodes() {
        let a = h.eval(*z)?.norm();
        r = [r[0].min(a), r[1].max(a)];
    }
    Ok(r)
}
