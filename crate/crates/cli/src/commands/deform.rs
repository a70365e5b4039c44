use std::f64::consts::FRAC_PI_2;

use gaussflux::nullcurve::{lift_weierstrass, sampled_nullity};
use gaussflux::periodsolver::{
    period_map, solve_gg2, solve_multiplier_family, solve_null_curve_family, TargetMode,
};
use gaussflux::surface::{
    affine_singular_values, associated_family, first_fundamental_form, flat_deformation_avoiding,
    nonflat_deformation,
};
use gaussflux::{
    CircularDomain, ExpMultiplier, NullData, NullField, PeriodTarget, WeierstrassPair, C64,
};
use serde_json::json;

use super::{field_checks, gauss_of, mesh_artifact, rank_result, scaled_exp, Job};
use crate::config::{DeformKind, DeformSpec, InputSpec, RationalSpec};
use crate::report::Recorder;
use crate::CliError;

pub fn run(job: &Job, rec: &mut Recorder) -> Result<(), CliError> {
    let spec = job
        .config
        .deform
        .clone()
        .ok_or_else(|| CliError::Config("missing `deform` section".into()))?;
    if spec.samples == 0 {
        return Err(CliError::Config("deform.samples must be at least 1".into()));
    }
    let domain = job.config.domain()?;
    rec.result("kind", spec.kind);
    match spec.kind {
        DeformKind::Associated => associated(job, rec, &spec, &domain),
        DeformKind::Flatten => flatten(job, rec, &spec, &domain),
        DeformKind::Nonflatize => nonflatize(job, rec, &spec, &domain),
        DeformKind::FluxIsotopy => isotopy(job, rec, &spec, &domain),
    }
}

fn parameters(spec: &DeformSpec, default: [f64; 2]) -> Vec<f64> {
    let [a, b] = spec.range.unwrap_or(default);
    let k = spec.samples;
    (0..=k)
        .map(|i| {
            if i == k {
                b
            } else {
                a + (b - a) * i as f64 / k as f64
            }
        })
        .collect()
}

/// `h` with vanishing complex periods against `f`, or `h ≡ 1`.
fn preprocessed(
    job: &Job,
    rec: &mut Recorder,
    spec: &DeformSpec,
    f: &NullData,
) -> Result<ExpMultiplier, CliError> {
    if !spec.preprocess || f.domain().holes().is_empty() {
        return Ok(ExpMultiplier::identity(f.domain(), 0));
    }
    let opts = job.config.solver;
    let family = solve_null_curve_family(f, opts.continuation_steps, &opts)?;
    let last = family.last().expect("family is nonempty").report.clone();
    rec.result(
        "preprocess",
        json!({ "steps": family.len() - 1, "residual": last.residual }),
    );
    rec.stage("preprocess");
    Ok(last.multiplier)
}

fn tag(k: usize) -> String {
    format!("[{k}]")
}

fn associated(
    job: &Job,
    rec: &mut Recorder,
    spec: &DeformSpec,
    domain: &CircularDomain,
) -> Result<(), CliError> {
    let f = job.config.null_data(domain)?;
    let grid = job.grid(domain)?;
    let h = preprocessed(job, rec, spec, &f)?;
    let quad = job.config.solver.quad;
    let gauss = gauss_of(&f)?;
    let params = parameters(spec, [0.0, FRAC_PI_2]);
    let mut first: Option<Vec<[f64; 3]>> = None;
    for (k, s) in params.iter().enumerate() {
        let hs = associated_family(&f, &h, *s, &quad)?;
        let x = job.integrate(&f, &hs, &grid)?;
        field_checks(job, rec, &x, &gauss, &tag(k))?;
        let form: Vec<[f64; 3]> = first_fundamental_form(&x)?
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        match &first {
            None => first = Some(form),
            Some(f0) => {
                let scale = f0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                let diff = f0
                    .iter()
                    .flatten()
                    .zip(form.iter().flatten())
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                rec.check(
                    &format!("isometry{}", tag(k)),
                    diff / scale,
                    job.config.tolerances.residual,
                );
            }
        }
        mesh_artifact(rec, &format!("sample_{k:03}"), &x)?;
    }
    rec.result("parameters", &params);
    rec.stage("family");
    Ok(())
}

fn flatten(
    job: &Job,
    rec: &mut Recorder,
    spec: &DeformSpec,
    domain: &CircularDomain,
) -> Result<(), CliError> {
    let InputSpec::Weierstrass { g, phi3 } = job.config.input()? else {
        return Err(CliError::Config(
            "flatten needs a `weierstrass` input".into(),
        ));
    };
    let pair = WeierstrassPair::new(g.to_map()?, phi3.to_map()?);
    let f = lift_weierstrass(&pair, domain)?;
    let grid = job.grid(domain)?;
    let h = preprocessed(job, rec, spec, &f)?;
    let quad = job.config.solver.quad;
    let tol = job.config.tolerances;
    let params = parameters(spec, [0.0, 1.0]);
    for (k, lambda) in params.iter().enumerate() {
        let fl = flat_deformation_avoiding(&pair, &h, *lambda, domain, &quad)?;
        let x = job.integrate(&fl, &h, &grid)?;
        field_checks(job, rec, &x, &gauss_of(&fl)?, &tag(k))?;
        if *lambda == 0.0 {
            let s = affine_singular_values(&x.values);
            rec.check(&format!("flatness{}", tag(k)), s[2] / s[0], tol.flatness);
        }
        if *lambda == 1.0 {
            let input = job.integrate(&f, &h, &grid)?;
            rec.check(
                &format!("matches_input{}", tag(k)),
                x.max_distance(&input),
                tol.field_match,
            );
        }
        mesh_artifact(rec, &format!("sample_{k:03}"), &x)?;
    }
    rec.result("parameters", &params);
    rec.stage("family");
    Ok(())
}

fn nonflatize(
    job: &Job,
    rec: &mut Recorder,
    spec: &DeformSpec,
    domain: &CircularDomain,
) -> Result<(), CliError> {
    let phi3 = spec
        .phi3
        .clone()
        .unwrap_or_else(|| RationalSpec::Expr("1".into()))
        .to_map()?;
    let grid = job.grid(domain)?;
    let opts = job.config.solver;
    let tol = job.config.tolerances;
    let zero = C64::new(0.0, 0.0);
    let sol = solve_gg2(domain, &vec![(zero, zero); domain.homology_rank()], &opts)?;
    let worst = sol
        .periods
        .iter()
        .fold(0.0f64, |m, (a, b)| m.max(a.norm()).max(b.norm()));
    rec.check("gg2_periods", worst, tol.period);
    rec.result("gg2", json!({ "residual": sol.residual, "iterations": sol.iterations, "sigma_min": sol.sigma_min }));
    rec.stage("solve");
    let one = ExpMultiplier::identity(domain, 0);
    let params = parameters(spec, [0.0, 1.0]);
    for (k, lambda) in params.iter().enumerate() {
        let sample = nonflat_deformation(&sol.g, &phi3, *lambda, domain, &opts.quad)?;
        let x = job.integrate(&sample, &one, &grid)?;
        field_checks(job, rec, &x, &scaled_exp(&sol.g, *lambda), &tag(k))?;
        rec.check(
            &format!("nullity{}", tag(k)),
            sampled_nullity(&sample, &grid)?,
            tol.residual,
        );
        if k + 1 == params.len() {
            let rank = rank_result(job, rec, &sample, domain, &grid)?;
            rec.check_that(
                "full_rank",
                rank == 3,
                format!("rank {rank} at the last sample"),
            );
        }
        mesh_artifact(rec, &format!("sample_{k:03}"), &x)?;
    }
    rec.result("parameters", &params);
    rec.stage("family");
    Ok(())
}

fn isotopy(
    job: &Job,
    rec: &mut Recorder,
    spec: &DeformSpec,
    domain: &CircularDomain,
) -> Result<(), CliError> {
    let f = job.config.null_data(domain)?;
    let l = domain.homology_rank();
    if l == 0 {
        return Err(CliError::Config(
            "flux isotopy needs a domain with holes".into(),
        ));
    }
    let target = job.config.checked_flux(l, f.dim())?;
    let grid = job.grid(domain)?;
    let opts = job.config.solver;
    let tol = job.config.tolerances;
    let loops = domain.loops();
    let to = PeriodTarget::from_flux(&target.unwrap_or_else(|| vec![vec![0.0; f.dim()]; l]));
    let null_curve = to.values.iter().flatten().all(|v| *v == C64::new(0.0, 0.0));
    let family = if null_curve {
        solve_null_curve_family(&f, spec.samples, &opts)?
    } else {
        let start = period_map(&f, &ExpMultiplier::identity(domain, 0), &loops, &opts.quad)?;
        let from = PeriodTarget::new(TargetMode::FullComplex, start.rows);
        solve_multiplier_family(&f, &|t| from.lerp(&to, t), spec.samples, &opts)?
    };
    rec.stage("solve");
    let gauss = gauss_of(&f)?;
    for (k, s) in family.iter().enumerate() {
        let x = job.integrate(&f, &s.report.multiplier, &grid)?;
        field_checks(job, rec, &x, &gauss, &tag(k))?;
        mesh_artifact(rec, &format!("sample_{k:03}"), &x)?;
    }
    let last = &family.last().expect("family is nonempty").report;
    let p = period_map(&f, &last.multiplier, &loops, &opts.quad)?;
    rec.check("endpoint_periods", p.distance(&to), tol.period);
    rec.result("parameters", family.iter().map(|s| s.t).collect::<Vec<_>>());
    rec.stage("family");
    Ok(())
}
