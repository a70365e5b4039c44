use gaussflux::nullcurve::{component_class, flat_class_representative};
use gaussflux::periodsolver::{flux, period_map};
use gaussflux::{CircularDomain, ExpMultiplier, NullField};

use super::{field_checks, gauss_of, mesh_artifact, FieldDump, Job};
use crate::config::InputSpec;
use crate::report::Recorder;
use crate::CliError;

pub fn run(job: &Job, rec: &mut Recorder) -> Result<(), CliError> {
    let c = &job.config;
    let domain = c.domain()?;
    let quad = c.solver.quad;
    let (class, wanted) = match c.input()? {
        InputSpec::FlatClass { class } => (class.clone(), true),
        _ => {
            let f = c.null_data(&domain)?;
            if f.dim() != 3 {
                return Err(CliError::Config(format!(
                    "classify needs dimension 3, got {}",
                    f.dim()
                )));
            }
            (
                component_class(&f, &quad)?,
                c.classify.unwrap_or_default().representative,
            )
        }
    };
    if domain.holes().is_empty() {
        rec.result("class", Vec::<u8>::new());
        rec.skip("classify", "simply connected");
        return Ok(());
    }
    rec.result("class", &class);
    rec.stage("classify");
    if wanted {
        representative(job, rec, &domain, &class)?;
    }
    Ok(())
}

/// Flat immersion in the class, with its verification bundle.
fn representative(
    job: &Job,
    rec: &mut Recorder,
    domain: &CircularDomain,
    class: &[u8],
) -> Result<(), CliError> {
    let opts = job.config.solver;
    let tol = job.config.tolerances;
    let rep = flat_class_representative(domain, class, &opts)?;
    rec.result("representative_class", component_class(&rep, &opts.quad)?);
    rec.result("representative_data", &rep.data);
    rec.stage("representative");

    let one = ExpMultiplier::identity(domain, 0);
    let p = period_map(&rep, &one, &domain.loops(), &opts.quad)?;
    rec.check("real_period", p.max_real(), tol.period);
    rec.result("representative_flux", flux(&p).rows);
    let grid = job.grid(domain)?;
    let x = job.integrate(&rep, &one, &grid)?;
    rec.check("closure", x.closure_residual(), tol.closure);
    field_checks(job, rec, &x, &gauss_of(&rep.data)?, "")?;
    mesh_artifact(rec, "representative", &x)?;
    rec.json_file(
        "representative_field.json",
        &FieldDump::new(job, &x, &rep.multiplier),
    );
    rec.stage("verify");
    Ok(())
}
