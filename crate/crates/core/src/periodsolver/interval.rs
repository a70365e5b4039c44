use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::newton::{gauss_newton, Settings, StepKind};
use super::SolveError;
use crate::expr::Expr;
use crate::geometry::gauss_legendre;
use crate::linalg::{column_rank, complexify, pinv_solve, realify, realify_vec};
use crate::nullcurve::RANK_TOL;
use crate::C64;

type PathFn = dyn Fn(f64, &mut [C64]) + Send + Sync;

/// A map `[0, 1] → ℂⁿ` given by a formula.
#[derive(Clone)]
pub struct SampledPath {
    dim: usize,
    f: Arc<PathFn>,
}

/// A scalar path, `dim = 1`.
pub type ScalarPath = SampledPath;

impl std::fmt::Debug for SampledPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledPath")
            .field("dim", &self.dim)
            .finish()
    }
}

impl SampledPath {
    pub fn new(dim: usize, f: impl Fn(f64, &mut [C64]) + Send + Sync + 'static) -> Self {
        Self {
            dim,
            f: Arc::new(f),
        }
    }

    /// Componentwise expressions in the variable `s`.
    pub fn from_exprs(exprs: Vec<Expr>) -> Self {
        let dim = exprs.len();
        Self::new(dim, move |s, out| {
            for (o, e) in out.iter_mut().zip(&exprs) {
                *o = e.eval(C64::new(s, 0.0));
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, s: f64) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim];
        (self.f)(s, &mut v);
        v
    }

    /// Checks that the values on every window of length 0.1 (step 0.05) span `ℂⁿ`.
    pub fn nowhere_flat(&self) -> Result<(), SolveError> {
        let n = self.dim;
        let m = 4 * n + 1;
        for k in 0..19 {
            let start = 0.05 * k as f64;
            let end = start + 0.1;
            let cols: Vec<Vec<C64>> = (0..m)
                .map(|i| self.eval(start + (end - start) * i as f64 / (m - 1) as f64))
                .collect();
            let rank = column_rank(&cols, n, RANK_TOL);
            if rank < n {
                return Err(SolveError::NotNowhereFlat { start, end, rank });
            }
        }
        Ok(())
    }
}

/// C^∞ step from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// C^∞ bump with peak 1 at `center`, supported on `(center − half, center + half)`.
fn bump(s: f64, center: f64, half: f64) -> f64 {
    let x = (s - center) / half;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Nowhere-vanishing function on `[0, 1]` sampled as
/// `h(s) = exp(Λ(s) + Σ β_k b_k(s))`, where `Λ` blends smoothly between
/// log-values at knots and `b_k` are disjoint bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMultiplier {
    /// `(s, log h(s))`, increasing in `s`, from 0 to 1.
    pub knots: Vec<(f64, C64)>,
    /// `(center, half-width)` of each correction bump.
    pub bumps: Vec<(f64, f64)>,
    pub beta: Vec<C64>,
    /// Residual of the target integral by the construction's quadrature.
    pub residual: f64,
    /// Residual by composite Simpson at four times the resolution.
    pub verified_residual: f64,
    /// Smallest `|h|` seen on a dense sample.
    pub min_abs: f64,
    /// Correction iterations.
    pub iterations: usize,
}

impl IntervalMultiplier {
    fn identity() -> Self {
        Self {
            knots: vec![(0.0, C64::new(0.0, 0.0)), (1.0, C64::new(0.0, 0.0))],
            bumps: Vec::new(),
            beta: Vec::new(),
            residual: 0.0,
            verified_residual: 0.0,
            min_abs: 1.0,
            iterations: 0,
        }
    }

    fn profile(&self, s: f64) -> C64 {
        let k = self
            .knots
            .partition_point(|(x, _)| *x <= s)
            .clamp(1, self.knots.len() - 1);
        let (a, la) = self.knots[k - 1];
        let (b, lb) = self.knots[k];
        if la == lb || b <= a {
            return la;
        }
        la + (lb - la) * smooth_step((s - a) / (b - a))
    }

    fn log_h(&self, s: f64, beta: &[C64]) -> C64 {
        let mut v = self.profile(s);
        for ((c, w), b) in self.bumps.iter().zip(beta) {
            v += b * bump(s, *c, *w);
        }
        v
    }

    pub fn eval(&self, s: f64) -> C64 {
        self.log_h(s, &self.beta).exp()
    }

    /// Sample values at `m + 1` equispaced points.
    pub fn samples(&self, m: usize) -> Vec<(f64, C64)> {
        (0..=m)
            .map(|i| {
                let s = i as f64 / m as f64;
                (s, self.eval(s))
            })
            .collect()
    }

    /// Knot and bump boundaries, where quadrature pieces start and end.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.knots.iter().map(|k| k.0).collect();
        for (c, w) in &self.bumps {
            b.extend([c - w, *c, c + w]);
        }
        b.retain(|x| (0.0..=1.0).contains(x));
        b.extend([0.0, 1.0]);
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        b
    }

    fn measure_min(&mut self) {
        let mut m = f64::INFINITY;
        for (_, v) in self.samples(20_000) {
            m = m.min(v.norm());
        }
        for s in self.breakpoints() {
            m = m.min(self.eval(s).norm());
        }
        self.min_abs = m;
    }
}

/// Controls for the interval constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntervalOptions {
    /// Accepted residual of the correction step.
    pub tol: f64,
    /// Error budget that sets the ramp width.
    pub epsilon: f64,
    /// Window half-width for the (g, g²) construction.
    pub tau: f64,
    /// Valley level `|h|` for the (g, g²) construction.
    pub valley: f64,
    /// Ramp width of the (g, g²) construction.
    pub transition: f64,
    pub max_iterations: usize,
    /// Gauss–Legendre pieces between consecutive breakpoints.
    pub pieces: usize,
}

impl Default for IntervalOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            epsilon: 1e-2,
            tau: 0.02,
            valley: 0.01,
            transition: 0.01,
            max_iterations: 100,
            pieces: 8,
        }
    }
}

/// Composite 16-point Gauss–Legendre between breakpoints.
fn gl_integrate(
    breaks: &[f64],
    pieces: usize,
    dim: usize,
    mut f: impl FnMut(f64, &mut [C64]),
) -> Vec<C64> {
    let (x, w) = gauss_legendre(16);
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    for seg in breaks.windows(2) {
        let h = (seg[1] - seg[0]) / pieces as f64;
        for p in 0..pieces {
            let a = seg[0] + h * p as f64;
            for (xi, wi) in x.iter().zip(&w) {
                f(a + 0.5 * h * (1.0 + xi), &mut buf);
                for (s, v) in acc.iter_mut().zip(&buf) {
                    *s += v * (0.5 * h * wi);
                }
            }
        }
    }
    acc
}

/// Composite Simpson with `intervals` (even) subintervals between breakpoints.
fn simpson_integrate(
    breaks: &[f64],
    intervals: usize,
    dim: usize,
    mut f: impl FnMut(f64, &mut [C64]),
) -> Vec<C64> {
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    for seg in breaks.windows(2) {
        let h = (seg[1] - seg[0]) / intervals as f64;
        for i in 0..=intervals {
            let wt = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            f(seg[0] + h * i as f64, &mut buf);
            for (s, v) in acc.iter_mut().zip(&buf) {
                *s += v * (wt * h / 3.0);
            }
        }
    }
    acc
}

fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Builds the integrand `(w, dw/dβ)` for the correction of `m`.
type Moments<'a> = dyn Fn(&IntervalMultiplier, &[C64], f64, &mut [C64], bool) + 'a;

/// Gauss–Newton on the bump coefficients so that the moments hit `target`.
fn correct(
    m: &mut IntervalMultiplier,
    target: &[C64],
    moments: &Moments<'_>,
    opts: &IntervalOptions,
) -> Result<(), SolveError> {
    let k = m.bumps.len();
    let r = target.len();
    let breaks = m.breakpoints();
    let base = m.clone();
    let eval = |beta: &[C64], jac: bool| -> Vec<C64> {
        let dim = if jac { r * (1 + k) } else { r };
        gl_integrate(&breaks, opts.pieces, dim, |s, out| {
            moments(&base, beta, s, out, jac)
        })
    };
    let out = gauss_newton(
        realify_vec(&vec![C64::new(0.0, 0.0); k]),
        |x| {
            let beta = complexify(x);
            let v = eval(&beta, true);
            let res: Vec<C64> = (0..r).map(|i| v[i] - target[i]).collect();
            let j = DMatrix::from_fn(r, k, |i, c| v[r * (1 + c) + i]);
            Ok((realify_vec(&res), realify(&j)))
        },
        |x| {
            let v = eval(&complexify(x), false);
            Ok(realify_vec(
                &(0..r).map(|i| v[i] - target[i]).collect::<Vec<_>>(),
            ))
        },
        Settings {
            tol: opts.tol,
            max_iterations: opts.max_iterations,
            max_halvings: 20,
            step: StepKind::MinNormStep,
        },
    )?;
    if !out.converged {
        return Err(SolveError::CorrectionFailed {
            residual: out.residual,
        });
    }
    m.beta = complexify(&out.x);
    m.iterations = out.iterations;
    let primary = gl_integrate(&breaks, opts.pieces, r, |s, o| {
        moments(m, &m.beta, s, o, false)
    });
    m.residual = distance(&primary, target);
    let check = simpson_integrate(&breaks, 4 * 16 * opts.pieces, r, |s, o| {
        moments(m, &m.beta, s, o, false)
    });
    m.verified_residual = distance(&check, target);
    m.measure_min();
    Ok(())
}

/// Nowhere-vanishing `h: [0, 1] → ℂ*` with `h(0) = h(1) = 1` and `∫ h f ds = α`.
///
/// The interval is cut into `2n` pieces; constants `g_j` with `Σ g_j V_j = α`
/// (closest to all ones) are spread over the pieces with smooth log-linear
/// ramps to 1 at every cut, and the remaining error is removed by bumps in
/// `[0.25, 0.75]`.
pub fn interval_multiplier(
    path: &SampledPath,
    alpha: &[C64],
    opts: &IntervalOptions,
) -> Result<IntervalMultiplier, SolveError> {
    let n = path.dim();
    if alpha.len() != n {
        return Err(SolveError::DimensionMismatch(format!(
            "alpha has {} entries, path has {n}",
            alpha.len()
        )));
    }
    path.nowhere_flat()?;
    let whole = gl_integrate(&[0.0, 1.0], 64, n, |s, out| {
        out.copy_from_slice(&path.eval(s))
    });
    if distance(&whole, alpha) < opts.tol {
        let mut id = IntervalMultiplier::identity();
        id.residual = distance(&whole, alpha);
        id.verified_residual = distance(
            &simpson_integrate(&[0.0, 1.0], 4 * 64 * 16, n, |s, o| {
                o.copy_from_slice(&path.eval(s))
            }),
            alpha,
        );
        return Ok(id);
    }
    let segs = 2 * n;
    let cuts: Vec<f64> = (0..=segs).map(|j| j as f64 / segs as f64).collect();
    let v: Vec<Vec<C64>> = cuts
        .windows(2)
        .map(|c| gl_integrate(c, 16, n, |s, out| out.copy_from_slice(&path.eval(s))))
        .collect();
    let vm = DMatrix::from_fn(n, segs, |i, j| v[j][i]);
    let ones = DVector::from_element(segs, C64::new(1.0, 0.0));
    let rhs: Vec<C64> = (DVector::from_row_slice(alpha) - &vm * &ones)
        .iter()
        .copied()
        .collect();
    let (y, _) = pinv_solve(&realify(&vm), &realify_vec(&rhs), 1e-12);
    let alpha_norm = alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let floor = 1e-6 * (1.0 + alpha_norm);
    let g: Vec<C64> = complexify(&y)
        .iter()
        .map(|d| {
            let gj = C64::new(1.0, 0.0) + d;
            if gj.norm() >= floor {
                gj
            } else if gj.norm() > 0.0 {
                gj / gj.norm() * floor
            } else {
                C64::new(floor, 0.0)
            }
        })
        .collect();
    let fmax = (0..=1000)
        .map(|i| {
            path.eval(i as f64 / 1000.0)
                .iter()
                .map(|x| x.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let c = g.iter().map(|x| x.norm()).fold(fmax.max(1.0), f64::max);
    let eta = (opts.epsilon / (4.0 * c * (c + 1.0) * segs as f64)).min(0.01);
    let mut knots = vec![(0.0, C64::new(0.0, 0.0))];
    for (j, gj) in g.iter().enumerate() {
        let l = gj.ln();
        knots.push((cuts[j] + eta, l));
        knots.push((cuts[j + 1] - eta, l));
        knots.push((cuts[j + 1], C64::new(0.0, 0.0)));
    }
    let nb = 2 * segs;
    let width = 0.5 / nb as f64;
    let bumps = (0..nb)
        .map(|k| (0.25 + width * (k as f64 + 0.5), 0.45 * width))
        .collect();
    let mut m = IntervalMultiplier {
        knots,
        bumps,
        beta: vec![C64::new(0.0, 0.0); nb],
        ..IntervalMultiplier::identity()
    };
    let moments = |m: &IntervalMultiplier, beta: &[C64], s: f64, out: &mut [C64], jac: bool| {
        let h = m.log_h(s, beta).exp();
        let f = path.eval(s);
        for i in 0..n {
            out[i] = h * f[i];
        }
        if jac {
            for (k, (c, w)) in m.bumps.iter().enumerate() {
                let b = bump(s, *c, *w);
                for i in 0..n {
                    out[n * (1 + k) + i] = out[i] * b;
                }
            }
        }
    };
    correct(&mut m, alpha, &moments, opts)?;
    Ok(m)
}

/// Nowhere-vanishing `h` with `h(0) = h(1) = 1` and
/// `∫ a (h f, h² f²) ds = x`, built from two windows where `|h|` is large,
/// valleys where `|h|` is small, and a bump correction inside the windows.
pub fn interval_gg2(
    f: &ScalarPath,
    a: &ScalarPath,
    x: [C64; 2],
    opts: &IntervalOptions,
) -> Result<IntervalMultiplier, SolveError> {
    if f.dim() != 1 || a.dim() != 1 {
        return Err(SolveError::DimensionMismatch(
            "scalar paths expected".into(),
        ));
    }
    let fv = |s: f64| f.eval(s)[0];
    let av = |s: f64| a.eval(s)[0];
    let cols: Vec<Vec<C64>> = (0..=200)
        .map(|i| {
            let v = fv(i as f64 / 200.0);
            vec![v, 2.0 * v * v]
        })
        .collect();
    if column_rank(&cols, 2, RANK_TOL) < 2 {
        return Err(SolveError::SpanSelectionFailed(
            "values of (f, 2f²) do not span ℂ²".into(),
        ));
    }
    let moments = |m: &IntervalMultiplier, beta: &[C64], s: f64, out: &mut [C64], jac: bool| {
        let h = m.log_h(s, beta).exp();
        let (fs, as_) = (fv(s), av(s));
        out[0] = as_ * h * fs;
        out[1] = as_ * h * h * fs * fs;
        if jac {
            for (k, (c, w)) in m.bumps.iter().enumerate() {
                let b = bump(s, *c, *w);
                out[2 + 2 * k] = out[0] * b;
                out[3 + 2 * k] = 2.0 * out[1] * b;
            }
        }
    };
    let id = IntervalMultiplier::identity();
    let whole = gl_integrate(&[0.0, 1.0], 64, 2, |s, out| {
        moments(&id, &[], s, out, false)
    });
    if distance(&whole, &x) < opts.tol {
        let mut id = id;
        id.residual = distance(&whole, &x);
        id.verified_residual = distance(
            &simpson_integrate(&[0.0, 1.0], 4 * 64 * 16, 2, |s, out| {
                moments(&IntervalMultiplier::identity(), &[], s, out, false)
            }),
            &x,
        );
        return Ok(id);
    }
    let tau = opts.tau;
    let pts: Vec<f64> = (1..=4).map(|i| (i as f64 - 0.5) / 4.0).collect();
    let big_a: Vec<C64> = pts.iter().map(|s| av(*s) * fv(*s)).collect();
    let big_b: Vec<C64> = pts.iter().map(|s| av(*s) * fv(*s) * fv(*s)).collect();
    let delta = C64::new(0.25, 0.0);
    let mut best: Option<(f64, Vec<C64>)> = None;
    for i in 0..4 {
        for k in 0..4 {
            if i == k || big_a[k].norm() < 1e-12 {
                continue;
            }
            let others: Vec<usize> = (0..4).filter(|m| *m != i && *m != k).collect();
            let r1 = x[0] - others.iter().map(|m| big_a[*m] * delta).sum::<C64>();
            let r2 = 2.0 * tau * x[1]
                - others
                    .iter()
                    .map(|m| big_b[*m] * delta * delta)
                    .sum::<C64>();
            let ak2 = big_a[k] * big_a[k];
            let qa = big_b[i] + big_b[k] * big_a[i] * big_a[i] / ak2;
            let qb = -2.0 * big_b[k] * r1 * big_a[i] / ak2;
            let qc = big_b[k] * r1 * r1 / ak2 - r2;
            let roots: Vec<C64> = if qa.norm() < 1e-12 * (qb.norm() + qc.norm()) {
                if qb.norm() == 0.0 {
                    continue;
                }
                vec![-qc / qb]
            } else {
                let disc = (qb * qb - 4.0 * qa * qc).sqrt();
                vec![(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)]
            };
            for yi in roots {
                let yk = (r1 - big_a[i] * yi) / big_a[k];
                if !(yi.is_finite() && yk.is_finite()) || yi.norm() < 1e-8 || yk.norm() < 1e-8 {
                    continue;
                }
                let mut y = vec![delta; 4];
                y[i] = yi;
                y[k] = yk;
                let size = yi.norm().max(yk.norm());
                if best.as_ref().is_none_or(|b| size < b.0) {
                    best = Some((size, y));
                }
            }
        }
    }
    let Some((_, y)) = best else {
        return Err(SolveError::SpanSelectionFailed(
            "no admissible window heights".into(),
        ));
    };
    let w = opts.transition;
    let valley = C64::new(opts.valley.ln(), 0.0);
    let mut knots = vec![(0.0, C64::new(0.0, 0.0)), (w, valley)];
    for (s, yi) in pts.iter().zip(&y) {
        let l = (yi / (2.0 * tau)).ln();
        knots.push((s - tau - w, valley));
        knots.push((s - tau, l));
        knots.push((s + tau, l));
        knots.push((s + tau + w, valley));
    }
    knots.push((1.0 - w, valley));
    knots.push((1.0, C64::new(0.0, 0.0)));
    let bumps = pts
        .iter()
        .flat_map(|s| [(s - tau / 2.0, 0.45 * tau), (s + tau / 2.0, 0.45 * tau)])
        .collect::<Vec<_>>();
    let mut m = IntervalMultiplier {
        knots,
        beta: vec![C64::new(0.0, 0.0); bumps.len()],
        bumps,
        ..IntervalMultiplier::identity()
    };
    correct(&mut m, &x, &moments, opts)?;
    Ok(m)
}
