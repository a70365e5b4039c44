use std::fmt::Write as _;

use gaussflux::periodsolver::{interval_gg2, interval_multiplier, IntervalMultiplier, SampledPath};

use super::Job;
use crate::config::{parse_s, IntervalKind};
use crate::report::Recorder;
use crate::CliError;

const CSV_SAMPLES: usize = 1000;

pub fn run(job: &Job, rec: &mut Recorder) -> Result<(), CliError> {
    let spec = job
        .config
        .interval
        .clone()
        .ok_or_else(|| CliError::Config("missing `interval` section".into()))?;
    let path = SampledPath::from_exprs(spec.parsed_components()?);
    let m = match spec.kind {
        IntervalKind::Multiplier => {
            let alpha = spec
                .alpha
                .as_ref()
                .ok_or_else(|| CliError::Config("multiplier needs `alpha`".into()))?;
            interval_multiplier(&path, alpha, &spec.options)?
        }
        IntervalKind::Gg2 => {
            if path.dim() != 1 {
                return Err(CliError::Config(format!(
                    "gg2 needs one component, got {}",
                    path.dim()
                )));
            }
            let weight =
                SampledPath::from_exprs(vec![parse_s(spec.weight.as_deref().unwrap_or("1"))?]);
            let x = spec
                .targets
                .ok_or_else(|| CliError::Config("gg2 needs `targets`".into()))?;
            interval_gg2(&path, &weight, x, &spec.options)?
        }
    };
    rec.stage("solve");
    report(job, rec, &m);
    Ok(())
}

fn report(job: &Job, rec: &mut Recorder, m: &IntervalMultiplier) {
    let one = gaussflux::C64::new(1.0, 0.0);
    let ends = (m.eval(0.0) - one).norm().max((m.eval(1.0) - one).norm());
    rec.check(
        "verified_residual",
        m.verified_residual,
        job.config.tolerances.interval,
    );
    rec.check("endpoints", ends, 1e-12);
    rec.check_that(
        "nonvanishing",
        m.min_abs > 0.0,
        format!("min |h| = {:.3e}", m.min_abs),
    );
    rec.result("multiplier", m);
    let mut csv = String::from("s,re,im\n");
    for (s, v) in m.samples(CSV_SAMPLES) {
        writeln!(csv, "{s:.16e},{:.16e},{:.16e}", v.re, v.im).unwrap();
    }
    rec.file("multiplier.csv", csv);
    rec.stage("verify");
}
