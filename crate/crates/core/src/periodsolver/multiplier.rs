use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::newton::{gauss_newton, Settings, StepKind};
use super::{period_map, PeriodTarget, SolveError, SolveOptions, SolveReport, TargetMode};
use crate::geometry::{contour_integral_vec, HomologyLoop};
use crate::holomorphic::{ExpMultiplier, LaurentExpansion};
use crate::linalg::{complex_span_basis, complexify, real_span_basis, realify, realify_vec};
use crate::nullcurve::{NullField, RANK_TOL};
use crate::C64;

/// Candidate points per loop used to measure the span of the data.
const SPAN_SAMPLES: usize = 64;

/// Periods on one loop and their `n x K` coefficient derivatives.
type LoopPeriods = (Vec<C64>, DMatrix<C64>);

/// Complex span of the values of `f` on its homology loops, orthonormal columns.
pub(crate) fn data_span(
    f: &dyn NullField,
    loops: &[HomologyLoop],
) -> Result<DMatrix<C64>, SolveError> {
    let mut cols = Vec::new();
    for lp in loops {
        for k in 0..SPAN_SAMPLES {
            let v = f.eval(lp.point(k as f64 / SPAN_SAMPLES as f64))?;
            let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 {
                cols.push(v.iter().map(|x| x / n).collect::<Vec<_>>());
            }
        }
    }
    Ok(complex_span_basis(&cols, f.dim(), RANK_TOL))
}

/// Periods of `exp(u) f` as a function of the Laurent coefficients of `u`,
/// expressed in coordinates of the span of the data.
struct PeriodProblem<'a> {
    f: &'a dyn NullField,
    loops: Vec<HomologyLoop>,
    opts: SolveOptions,
    target: PeriodTarget,
    span_c: DMatrix<C64>,
    span_r: DMatrix<f64>,
}

impl<'a> PeriodProblem<'a> {
    fn new(
        f: &'a dyn NullField,
        target: &PeriodTarget,
        opts: &SolveOptions,
    ) -> Result<Self, SolveError> {
        let loops = f.domain().loops();
        let n = f.dim();
        if target.values.len() != loops.len() || target.values.iter().any(|r| r.len() != n) {
            return Err(SolveError::DimensionMismatch(format!(
                "target must be {} x {n}",
                loops.len()
            )));
        }
        let span_c = data_span(f, &loops)?;
        let re_cols: Vec<DVector<f64>> = (0..span_c.ncols())
            .flat_map(|k| {
                let c = span_c.column(k);
                [
                    DVector::from_fn(n, |i, _| c[i].re),
                    DVector::from_fn(n, |i, _| c[i].im),
                ]
            })
            .collect();
        let span_r = real_span_basis(&re_cols, n, RANK_TOL);
        for (j, q) in target.values.iter().enumerate() {
            let distance = match target.mode {
                TargetMode::FullComplex => {
                    let v = DVector::from_row_slice(q);
                    let proj = &span_c * (span_c.adjoint() * &v);
                    (v - proj).norm()
                }
                TargetMode::RealPart => {
                    let v = DVector::from_fn(n, |i, _| q[i].re);
                    let proj = &span_r * (span_r.transpose() * &v);
                    (v - proj).norm()
                }
            };
            let scale = q.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1.0);
            if distance > 1e-8 * scale {
                return Err(SolveError::TargetOutsideSpan {
                    loop_index: j,
                    distance,
                });
            }
        }
        Ok(Self {
            f,
            loops,
            opts: *opts,
            target: target.clone(),
            span_c,
            span_r,
        })
    }

    /// Periods and (optionally) their derivatives `n x K` per loop.
    fn integrate(
        &self,
        u: &LaurentExpansion,
        with_jacobian: bool,
    ) -> Result<Vec<LoopPeriods>, SolveError> {
        let n = self.f.dim();
        let k = if with_jacobian { u.len() } else { 0 };
        let dim = n * (1 + k);
        self.loops
            .iter()
            .map(|lp| {
                let mut fv = vec![C64::new(0.0, 0.0); n];
                let mut basis = vec![C64::new(0.0, 0.0); u.len()];
                let r = contour_integral_vec::<SolveError, _>(
                    dim,
                    |z, out| {
                        self.f.eval_into(z, &mut fv)?;
                        let h = u.eval(z).exp();
                        for (o, v) in out[..n].iter_mut().zip(&fv) {
                            *o = v * h;
                        }
                        if k > 0 {
                            u.basis_values(z, &mut basis);
                            for (c, b) in basis.iter().enumerate() {
                                for i in 0..n {
                                    out[n * (1 + c) + i] = out[i] * b;
                                }
                            }
                        }
                        Ok(())
                    },
                    lp,
                    &self.opts.quad,
                )?;
                let p = r.value[..n].to_vec();
                let jac = DMatrix::from_fn(n, k, |i, c| r.value[n * (1 + c) + i]);
                Ok((p, jac))
            })
            .collect()
    }

    /// Appends `u_0 − pin` (constant coefficient) to the period residual.
    fn normalized(
        &self,
        u: &LaurentExpansion,
        pin: C64,
        parts: (DVector<f64>, Option<DMatrix<f64>>),
    ) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let (r, j) = parts;
        if !self.opts.normalize || self.target.mode != TargetMode::FullComplex {
            return (r, j);
        }
        let v = u.coefficients()[0] - pin;
        let r = DVector::from_iterator(r.len() + 2, r.iter().copied().chain([v.re, v.im]));
        let k = u.len();
        let j = j.map(|m| {
            let mut out = DMatrix::zeros(m.nrows() + 2, m.ncols());
            out.rows_mut(0, m.nrows()).copy_from(&m);
            out[(m.nrows(), 0)] = 1.0;
            out[(m.nrows() + 1, k)] = 1.0;
            out
        });
        (r, j)
    }

    fn residual_parts(
        &self,
        per_loop: &[(Vec<C64>, DMatrix<C64>)],
        with_jacobian: bool,
    ) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let n = self.f.dim();
        match self.target.mode {
            TargetMode::FullComplex => {
                let m = self.span_c.ncols();
                let qh = self.span_c.adjoint();
                let mut r = Vec::with_capacity(m * per_loop.len());
                let mut jrows: Vec<DMatrix<C64>> = Vec::new();
                for ((p, j), q) in per_loop.iter().zip(&self.target.values) {
                    let d = DVector::from_fn(n, |i, _| p[i] - q[i]);
                    r.extend((&qh * d).iter().copied());
                    if with_jacobian {
                        jrows.push(&qh * j);
                    }
                }
                let jac = with_jacobian.then(|| {
                    let cols = jrows.first().map(|m| m.ncols()).unwrap_or(0);
                    let stacked =
                        DMatrix::from_fn(m * jrows.len(), cols, |i, c| jrows[i / m][(i % m, c)]);
                    realify(&stacked)
                });
                (realify_vec(&r), jac)
            }
            TargetMode::RealPart => {
                let m = self.span_r.ncols();
                let rt = self.span_r.transpose();
                let mut r = Vec::with_capacity(m * per_loop.len());
                let mut jrows: Vec<DMatrix<f64>> = Vec::new();
                for ((p, j), q) in per_loop.iter().zip(&self.target.values) {
                    let d = DVector::from_fn(n, |i, _| p[i].re - q[i].re);
                    r.extend((&rt * d).iter().copied());
                    if with_jacobian {
                        let k = j.ncols();
                        // d Re P = Re J d(Re c) − Im J d(Im c)
                        let real = DMatrix::from_fn(n, 2 * k, |i, c| {
                            if c < k {
                                j[(i, c)].re
                            } else {
                                -j[(i, c - k)].im
                            }
                        });
                        jrows.push(&rt * real);
                    }
                }
                let jac = with_jacobian.then(|| {
                    let cols = jrows.first().map(|m| m.ncols()).unwrap_or(0);
                    DMatrix::from_fn(m * jrows.len(), cols, |i, c| jrows[i / m][(i % m, c)])
                });
                (DVector::from_vec(r), jac)
            }
        }
    }

    fn expansion(template: &LaurentExpansion, x: &DVector<f64>) -> LaurentExpansion {
        let mut u = template.clone();
        u.set_coefficients(&complexify(x));
        u
    }

    /// Gauss–Newton from `u0` at its own degree.
    fn run(
        &self,
        u0: &LaurentExpansion,
        step: StepKind,
    ) -> Result<(LaurentExpansion, super::newton::Outcome), SolveError> {
        let template = u0.clone();
        let pin = u0.coefficients()[0];
        let settings = Settings {
            tol: self.opts.tol,
            max_iterations: self.opts.max_iterations,
            max_halvings: self.opts.max_halvings,
            step,
        };
        let out = gauss_newton(
            realify_vec(&u0.coefficients()),
            |x| {
                let u = Self::expansion(&template, x);
                let parts = self.integrate(&u, true)?;
                let (r, j) = self.normalized(&u, pin, self.residual_parts(&parts, true));
                Ok((r, j.expect("jacobian requested")))
            },
            |x| {
                let u = Self::expansion(&template, x);
                let parts = self.integrate(&u, false)?;
                Ok(self
                    .normalized(&u, pin, self.residual_parts(&parts, false))
                    .0)
            },
            settings,
        )?;
        Ok((Self::expansion(&template, &out.x), out))
    }

    /// Runs at increasing Laurent degree until converged or the cap is reached.
    fn solve_from(&self, u0: &LaurentExpansion) -> Result<SolveReport, SolveError> {
        let mut u = u0.clone();
        let mut iterations = 0;
        let mut trace = Vec::new();
        loop {
            let (un, out) = self.run(&u, StepKind::MinNormSolution)?;
            iterations += out.iterations;
            trace.extend_from_slice(&out.trace);
            if out.converged {
                let h = ExpMultiplier::new(un);
                let periods = period_map(self.f, &h, &self.loops, &self.opts.quad)?;
                return Ok(SolveReport {
                    residual: periods.distance(&self.target),
                    degree: h.u.degree(),
                    multiplier: h,
                    iterations,
                    sigma_min: out.sigma_min,
                    sigma_max: out.sigma_max,
                    continuation_steps: 0,
                    trace,
                    periods,
                });
            }
            let d = un.degree();
            if d >= self.opts.max_degree {
                return Err(if out.rank < out.rows {
                    SolveError::RankDeficient {
                        rank: out.rank,
                        rows: out.rows,
                        sigma_min: out.sigma_min,
                        residual: out.residual,
                    }
                } else {
                    SolveError::MaxIterations {
                        iterations,
                        residual: out.residual,
                        sigma_min: out.sigma_min,
                    }
                });
            }
            u = un.with_degree((2 * d).clamp(1, self.opts.max_degree));
        }
    }
}

/// Finds `h = exp(u)` whose periods against `f` match the target, starting at `h ≡ 1`.
///
/// A direct Gauss–Newton solve is tried first; if it fails, the target is
/// approached by continuation from the current periods of `f`.
pub fn solve_multiplier(
    f: &dyn NullField,
    target: &PeriodTarget,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let u0 = LaurentExpansion::zero(f.domain(), opts.degree);
    solve_multiplier_from(f, target, &u0, opts)
}

/// [`solve_multiplier`] from a given initial exponent.
pub fn solve_multiplier_from(
    f: &dyn NullField,
    target: &PeriodTarget,
    u0: &LaurentExpansion,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let problem = PeriodProblem::new(f, target, opts)?;
    match problem.solve_from(u0) {
        Ok(r) => Ok(r),
        Err(SolveError::MaxIterations { .. } | SolveError::RankDeficient { .. })
            if !f.domain().holes().is_empty() =>
        {
            let start = period_map(
                f,
                &ExpMultiplier::new(u0.clone()),
                &problem.loops,
                &opts.quad,
            )?;
            let from = PeriodTarget::new(target.mode, start.rows);
            let family = continuation(
                f,
                &|t| from.lerp(target, t),
                u0,
                opts.continuation_steps,
                opts,
            )?;
            let last = family.last().expect("continuation yields samples");
            let mut report = last.report.clone();
            report.continuation_steps = family.len() - 1;
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

/// One sample of a continuation family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySample {
    pub t: f64,
    pub report: SolveReport,
}

fn continuation(
    f: &dyn NullField,
    path: &dyn Fn(f64) -> PeriodTarget,
    u0: &LaurentExpansion,
    steps: usize,
    opts: &SolveOptions,
) -> Result<Vec<FamilySample>, SolveError> {
    let steps = steps.max(1);
    let first = PeriodProblem::new(f, &path(0.0), opts)?.solve_from(u0)?;
    let mut u = first.multiplier.u.clone();
    if opts.normalize {
        u = perturbed(&u, opts.seed_scale, opts.seed);
    }
    let mut out = vec![FamilySample {
        t: 0.0,
        report: first,
    }];
    let base = 1.0 / steps as f64;
    let min_step = base / f64::powi(2.0, opts.max_step_halvings as i32);
    let mut t = 0.0;
    let mut dt = base;
    while t < 1.0 {
        let tn = if t + dt > 1.0 - 1e-12 { 1.0 } else { t + dt };
        let problem = PeriodProblem::new(f, &path(tn), opts)?;
        match problem.solve_from(&u) {
            Ok(r) => {
                u = r.multiplier.u.clone();
                out.push(FamilySample { t: tn, report: r });
                t = tn;
                dt = (dt * 2.0).min(base);
            }
            Err(SolveError::MaxIterations { .. } | SolveError::RankDeficient { .. }) => {
                dt *= 0.5;
                if dt < min_step {
                    return Err(SolveError::ContinuationStalled { t, step: dt });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `u` with seeded uniform noise of size `scale` on every nonconstant coefficient.
fn perturbed(u: &LaurentExpansion, scale: f64, seed: u64) -> LaurentExpansion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = u.coefficients();
    for v in c.iter_mut().skip(1) {
        *v += C64::new(
            rng.random_range(-scale..=scale),
            rng.random_range(-scale..=scale),
        );
    }
    let mut out = u.clone();
    out.set_coefficients(&c);
    out
}

/// Discrete isotopy `h_t` following `path` from `t = 0` to `t = 1` in `steps`
/// equal steps, halving a step whenever its solve fails.
pub fn solve_multiplier_family(
    f: &dyn NullField,
    path: &dyn Fn(f64) -> PeriodTarget,
    steps: usize,
    opts: &SolveOptions,
) -> Result<Vec<FamilySample>, SolveError> {
    let u0 = LaurentExpansion::zero(f.domain(), opts.degree);
    continuation(f, path, &u0, steps, opts)
}

/// Family from the current periods of `f` to zero complex periods, i.e. to
/// a null curve `h f`, with `h` normalized so it cannot collapse to zero.
pub fn solve_null_curve_family(
    f: &dyn NullField,
    steps: usize,
    opts: &SolveOptions,
) -> Result<Vec<FamilySample>, SolveError> {
    let loops = f.domain().loops();
    let start = period_map(
        f,
        &ExpMultiplier::identity(f.domain(), opts.degree),
        &loops,
        &opts.quad,
    )?;
    let from = PeriodTarget::new(TargetMode::FullComplex, start.rows);
    let to = PeriodTarget::new(
        TargetMode::FullComplex,
        vec![vec![C64::new(0.0, 0.0); f.dim()]; loops.len()],
    );
    let opts = SolveOptions {
        normalize: true,
        ..*opts
    };
    solve_multiplier_family(f, &|t| from.lerp(&to, t), steps, &opts)
}
