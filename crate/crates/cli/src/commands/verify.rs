use gaussflux::nullcurve::validate_null;
use gaussflux::periodsolver::{flux, period_map};
use gaussflux::{DomainGrid, ExpMultiplier, ImmersionField, C64};

use super::{field_checks, gauss_of, input_dim, FieldDump, Job};
use crate::report::Recorder;
use crate::CliError;

fn read(job: &Job, p: &str) -> Result<String, CliError> {
    let path = job.path(p);
    std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Vertex positions of an OBJ file, in file order.
fn obj_vertices(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.lines()
        .filter(|l| l.starts_with("v "))
        .enumerate()
        .map(|(k, l)| {
            let v: Result<Vec<f64>, _> = l[2..].split_whitespace().map(str::parse).collect();
            match v {
                Ok(v) if v.len() == 3 => Ok(v),
                _ => Err(CliError::Config(format!(
                    "mesh vertex {k} is malformed: {l:?}"
                ))),
            }
        })
        .collect()
}

pub fn run(job: &Job, rec: &mut Recorder) -> Result<(), CliError> {
    let c = &job.config;
    let spec = c.verify.clone().unwrap_or_default();
    let n = input_dim(c.input()?)?;
    let domain = c.domain()?;
    let target_flux = c.checked_flux(domain.homology_rank(), n)?;
    let f = c.null_data(&domain)?;

    let (x, h) = if let Some(p) = &spec.field {
        let dump: FieldDump = serde_json::from_str(&read(job, p)?)
            .map_err(|e| CliError::Config(format!("{p}: {e}")))?;
        if dump.domain != c.domain {
            return Err(CliError::Config(format!(
                "{p}: domain differs from the config"
            )));
        }
        let grid = DomainGrid::build(&domain, dump.resolution, dump.boundary_offset)?;
        let values = match &spec.mesh {
            Some(m) => obj_vertices(&read(job, m)?)?,
            None => dump.values,
        };
        (
            field(grid, values, dump.basepoint, dump.base_value)?,
            Some(dump.multiplier),
        )
    } else if let Some(m) = &spec.mesh {
        let grid = job.grid(&domain)?;
        let values = obj_vertices(&read(job, m)?)?;
        let p0 = grid.nodes()[grid.len() / 2];
        (field(grid, values, p0, vec![0.0; 3])?, None)
    } else {
        return Err(CliError::Config(
            "verify needs `verify.field` or `verify.mesh`".into(),
        ));
    };
    if x.dim() != n {
        return Err(CliError::Config(format!(
            "field has dimension {}, data has {n}",
            x.dim()
        )));
    }
    rec.stage("load");

    let null = validate_null(&f, &x.grid)?;
    rec.result("nullity_residual", null.nullity_residual);
    rec.result("rank", null.rank);
    rec.stage("validate");

    let tol = c.tolerances;
    let h = match h {
        Some(h) => {
            rec.stage("periods");
            h
        }
        None => {
            rec.skip("periods", "no multiplier given, periods of f itself");
            ExpMultiplier::identity(&domain, 0)
        }
    };
    let p = period_map(&f, &h, &domain.loops(), &c.solver.quad)?;
    let fl = flux(&p);
    rec.check("real_period", p.max_real(), tol.period);
    if let Some(rows) = &target_flux {
        let err = fl
            .rows
            .iter()
            .flatten()
            .zip(rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rec.check("flux", err, tol.period);
    }
    rec.result("flux", &fl.rows);

    field_checks(job, rec, &x, &gauss_of(&f)?, "")?;
    rec.stage("residuals");
    Ok(())
}

fn field(
    grid: DomainGrid,
    values: Vec<Vec<f64>>,
    basepoint: C64,
    base_value: Vec<f64>,
) -> Result<ImmersionField, CliError> {
    if values.len() != grid.len() {
        return Err(CliError::Config(format!(
            "{} values for a grid of {} nodes",
            values.len(),
            grid.len()
        )));
    }
    Ok(ImmersionField {
        grid,
        values,
        basepoint,
        base_value,
        closure: Vec::new(),
    })
}
