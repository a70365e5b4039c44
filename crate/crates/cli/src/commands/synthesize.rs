use gaussflux::holomorphic::assert_nonvanishing;
use gaussflux::nullcurve::validate_null;
use gaussflux::periodsolver::{
    flux, period_map, solve_multiplier, solve_null_curve_family, SolveReport,
};
use gaussflux::{ExpMultiplier, PeriodTarget};
use serde_json::json;

use super::{
    field_checks, gauss_of, input_dim, mesh_artifact, modulus_range, rank_result, FieldDump, Job,
};
use crate::config::InputSpec;
use crate::report::Recorder;
use crate::CliError;

pub fn run(job: &Job, rec: &mut Recorder) -> Result<(), CliError> {
    let c = &job.config;
    let input = c.input()?;
    let n = input_dim(input)?;
    let domain = c.domain()?;
    let l = domain.homology_rank();
    let target_flux = c.checked_flux(l, n)?;
    let grid = job.grid(&domain)?;
    let f = c.null_data(&domain)?;
    rec.stage(if matches!(input, InputSpec::Weierstrass { .. }) {
        "lift"
    } else {
        "load"
    });

    let null = validate_null(&f, &grid)?;
    rec.result("nullity_residual", null.nullity_residual);
    rank_result(job, rec, &f, &domain, &grid)?;
    rec.stage("validate");

    let opts = c.solver;
    let null_curve = target_flux
        .as_ref()
        .is_some_and(|rows| rows.iter().flatten().all(|x| *x == 0.0));
    let solved: Option<(SolveReport, usize)> = if l == 0 {
        None
    } else if null_curve {
        let family = solve_null_curve_family(&f, opts.continuation_steps, &opts)?;
        let steps = family.len() - 1;
        family.into_iter().last().map(|s| (s.report, steps))
    } else {
        let target = match &target_flux {
            Some(rows) => PeriodTarget::from_flux(rows),
            None => PeriodTarget::real_zero(l, n),
        };
        let r = solve_multiplier(&f, &target, &opts)?;
        let steps = r.continuation_steps;
        Some((r, steps))
    };
    let h = match &solved {
        Some((r, steps)) => {
            rec.result(
                "solve",
                json!({
                    "residual": r.residual,
                    "iterations": r.iterations,
                    "sigma_min": r.sigma_min,
                    "sigma_max": r.sigma_max,
                    "degree": r.degree,
                    "continuation_steps": steps,
                }),
            );
            rec.stage("solve");
            r.multiplier.clone()
        }
        None => {
            rec.skip("solve", "simply connected");
            ExpMultiplier::identity(&domain, 0)
        }
    };

    let tol = c.tolerances;
    let p = period_map(&f, &h, &domain.loops(), &opts.quad)?;
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
        if null_curve {
            rec.check("complex_period", p.max_abs(), tol.period);
        }
    }
    rec.result("periods", &p.rows);
    rec.result("flux", &fl.rows);
    let nonvanishing = assert_nonvanishing(&h, &domain, &grid, &opts.quad)?;
    rec.check_that(
        "nonvanishing",
        nonvanishing,
        "argument principle and grid minimum of |h|",
    );
    rec.result("h_modulus_range", modulus_range(&h, &grid)?);
    rec.stage("periods");

    let x = job.integrate(&f, &h, &grid)?;
    rec.stage("integrate");
    rec.check("closure", x.closure_residual(), tol.closure);
    field_checks(job, rec, &x, &gauss_of(&f)?, "")?;
    rec.stage("verify");

    mesh_artifact(rec, "mesh", &x)?;
    rec.json_file("field.json", &FieldDump::new(job, &x, &h));
    rec.stage("export");
    Ok(())
}
