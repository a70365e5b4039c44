use gaussflux::nullcurve::{gauss_map_from_null, ComplexGaussMap};
use gaussflux::surface::stability_check;
use gaussflux::{NullField, RationalMap};

use super::Job;
use crate::config::InputSpec;
use crate::report::Recorder;
use crate::CliError;

pub fn run(job: &Job, rec: &mut Recorder) -> Result<(), CliError> {
    let c = &job.config;
    let domain = c.domain()?;
    let g: RationalMap = match c.input()? {
        InputSpec::Weierstrass { g, .. } => g.to_map()?,
        InputSpec::NullData { .. } => {
            let f = c.null_data(&domain)?;
            if f.dim() != 3 {
                return Err(CliError::Config(format!(
                    "area needs dimension 3, got {}",
                    f.dim()
                )));
            }
            match gauss_map_from_null(&f)?.1 {
                Some(ComplexGaussMap::Map(g)) => g,
                _ => RationalMap::one(),
            }
        }
        InputSpec::FlatClass { .. } => {
            return Err(CliError::Config("area needs a Gauss map".into()))
        }
    };
    let report = stability_check(&g, &domain, c.resolution)?;
    rec.check("area_error", report.area_error, c.tolerances.residual);
    rec.result("spherical_area", report.spherical_area);
    rec.result("area_error", report.area_error);
    rec.result("stable_by_area_criterion", report.stable_by_area_criterion);
    rec.result("verdict", report.verdict);
    rec.result("gauss_image_sample", &report.gauss_image_sample);
    rec.stage("area");
    Ok(())
}
