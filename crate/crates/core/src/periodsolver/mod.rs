//! Period maps, period-dominating sprays and the multiplier solvers.

mod gg2;
mod interval;
mod multiplier;
mod newton;
mod spray;

pub use gg2::{solve_gg2, Gg2Solution};
pub use interval::{
    interval_gg2, interval_multiplier, IntervalMultiplier, IntervalOptions, SampledPath, ScalarPath,
};
pub use multiplier::{
    solve_multiplier, solve_multiplier_family, solve_multiplier_from, solve_null_curve_family,
    FamilySample,
};
pub use spray::{build_spray, spray_jacobian, SprayJacobian};

use serde::{Deserialize, Serialize};

use crate::geometry::{contour_integral_vec, GeometryError, HomologyLoop, QuadratureSpec};
use crate::holomorphic::{ExpMultiplier, HoloError, Holomorphic};
use crate::nullcurve::{NullError, NullField};
use crate::C64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolveError {
    #[error(
        "target on loop {loop_index} lies outside the span of the data (distance {distance:.3e})"
    )]
    TargetOutsideSpan { loop_index: usize, distance: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e}, sigma_min {sigma_min:.3e})")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        sigma_min: f64,
    },
    #[error("period Jacobian has rank {rank} < {rows} (sigma_min {sigma_min:.3e}, residual {residual:.3e})")]
    RankDeficient {
        rank: usize,
        rows: usize,
        sigma_min: f64,
        residual: f64,
    },
    #[error("continuation stalled at t = {t} with step {step:.3e}")]
    ContinuationStalled { t: f64, step: f64 },
    #[error("data is not full: rank {rank} < {dim}")]
    NotFull { rank: usize, dim: usize },
    #[error("span selection failed: {0}")]
    SpanSelectionFailed(String),
    #[error("path is not nowhere flat: rank {rank} on [{start}, {end}]")]
    NotNowhereFlat { start: f64, end: f64, rank: usize },
    #[error("correction step failed (residual {residual:.3e})")]
    CorrectionFailed { residual: f64 },
    #[error("solution collapsed to a constant (nonconstant norm {norm:.3e})")]
    Degenerate { norm: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Holo(#[from] HoloError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Null(#[from] NullError),
}

/// Loop integrals `P[j][k] = ∮_{C_j} h f_k dz`, one row per homology loop.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PeriodVector {
    pub rows: Vec<Vec<C64>>,
}

impl PeriodVector {
    pub fn loops(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest modulus of any entry.
    pub fn max_abs(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest `|Re P|` of any entry.
    pub fn max_real(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.re.abs()))
    }

    /// Euclidean norm of `P − q` (or of the real parts only).
    pub fn distance(&self, target: &PeriodTarget) -> f64 {
        let mut s = 0.0;
        for (p, q) in self.rows.iter().zip(&target.values) {
            for (a, b) in p.iter().zip(q) {
                let d = a - b;
                s += match target.mode {
                    TargetMode::FullComplex => d.norm_sqr(),
                    TargetMode::RealPart => d.re * d.re,
                };
            }
        }
        s.sqrt()
    }
}

/// Which part of the periods a target constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    FullComplex,
    RealPart,
}

/// Prescribed periods, one complex `n`-vector per loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodTarget {
    pub mode: TargetMode,
    pub values: Vec<Vec<C64>>,
}

impl PeriodTarget {
    pub fn new(mode: TargetMode, values: Vec<Vec<C64>>) -> Self {
        Self { mode, values }
    }

    /// Vanishing real periods: the data integrates to an immersion.
    pub fn real_zero(loops: usize, dim: usize) -> Self {
        Self::new(
            TargetMode::RealPart,
            vec![vec![C64::new(0.0, 0.0); dim]; loops],
        )
    }

    /// Periods `i · p_j`: vanishing real part and flux `p`.
    pub fn from_flux(flux: &[Vec<f64>]) -> Self {
        Self::new(
            TargetMode::FullComplex,
            flux.iter()
                .map(|row| row.iter().map(|x| C64::new(0.0, *x)).collect())
                .collect(),
        )
    }

    /// `(1 − t) self + t other`, keeping the mode of `self`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self::new(
            self.mode,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| x * (1.0 - t) + y * t)
                        .collect()
                })
                .collect(),
        )
    }
}

/// Flux homomorphism on the homology basis: `p_j = Im P[j]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Flux {
    pub rows: Vec<Vec<f64>>,
    /// Largest `|Re P|`; a genuine immersion needs this to vanish.
    pub real_period: f64,
}

impl Flux {
    pub fn real_periods_vanish(&self, tol: f64) -> bool {
        self.real_period < tol
    }
}

/// `P[j] = ∮_{C_j} h f dz` on each loop.
pub fn period_map(
    f: &dyn NullField,
    h: &dyn Holomorphic,
    loops: &[HomologyLoop],
    quad: &QuadratureSpec,
) -> Result<PeriodVector, SolveError> {
    let n = f.dim();
    let rows = loops
        .iter()
        .map(|lp| {
            contour_integral_vec::<SolveError, _>(
                n,
                |z, out| {
                    f.eval_into(z, out)?;
                    let hv = h.eval(z)?;
                    out.iter_mut().for_each(|v| *v *= hv);
                    Ok(())
                },
                lp,
                quad,
            )
            .map(|r| r.value)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PeriodVector { rows })
}

/// [`period_map`] over the homology basis of `f`'s domain with `h ≡ 1`.
pub fn periods(f: &dyn NullField, quad: &QuadratureSpec) -> Result<PeriodVector, SolveError> {
    let one = ExpMultiplier::identity(f.domain(), 0);
    period_map(f, &one, &f.domain().loops(), quad)
}

pub fn flux(p: &PeriodVector) -> Flux {
    Flux {
        rows: p
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.im).collect())
            .collect(),
        real_period: p.max_real(),
    }
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Accepted Euclidean residual.
    pub tol: f64,
    pub max_iterations: usize,
    /// Step halvings in the line search.
    pub max_halvings: usize,
    /// Initial Laurent degree per center.
    pub degree: usize,
    /// Largest Laurent degree tried when the solve stalls.
    pub max_degree: usize,
    /// Initial continuation steps when a direct solve fails.
    pub continuation_steps: usize,
    /// Number of step halvings allowed during continuation.
    pub max_step_halvings: usize,
    /// Hold the constant Laurent coefficient of `u` at its initial value for
    /// full complex targets, so `h` cannot approach zero by uniform scaling.
    pub normalize: bool,
    /// Size of the seeded perturbation of the nonconstant coefficients that
    /// starts a normalized family off `h ≡ 1`.
    pub seed_scale: f64,
    pub seed: u64,
    pub quad: QuadratureSpec,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iterations: 200,
            max_halvings: 20,
            degree: 8,
            max_degree: 32,
            continuation_steps: 16,
            max_step_halvings: 10,
            normalize: false,
            seed_scale: 1e-3,
            seed: 0,
            quad: QuadratureSpec::default(),
        }
    }
}

/// Outcome of a multiplier solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub multiplier: ExpMultiplier,
    /// Distance between achieved and prescribed periods.
    pub residual: f64,
    pub iterations: usize,
    /// Smallest and largest singular value of the (span-projected) Jacobian at the solution.
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub continuation_steps: usize,
    pub degree: usize,
    /// Residual after each iteration.
    pub trace: Vec<f64>,
    pub periods: PeriodVector,
}
