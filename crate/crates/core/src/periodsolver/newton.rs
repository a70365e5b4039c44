use nalgebra::{DMatrix, DVector};

use super::SolveError;
use crate::linalg::pinv_solve;

/// Singular values below this fraction of the largest are dropped from the pseudoinverse.
pub(crate) const PINV_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum StepKind {
    /// `x ← x − J⁺ r`.
    MinNormStep,
    /// `x ← J⁺ (J x − r)`: iterates toward the least-norm solution, so the
    /// answer does not depend on the starting point within the solution set.
    MinNormSolution,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub step: StepKind,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank: usize,
    pub rows: usize,
    pub converged: bool,
}

fn rank_of(s: &[f64]) -> usize {
    let top = s.first().copied().unwrap_or(0.0);
    s.iter()
        .filter(|v| top > 0.0 && **v > PINV_TOL * top)
        .count()
}

/// Damped Gauss–Newton with a pseudoinverse step and a halving line search.
///
/// `jac(x)` returns the residual and its Jacobian, `res(x)` the residual only.
/// Returns `converged = false` (not an error) when the iteration stalls, so
/// callers can escalate.
pub(crate) fn gauss_newton<J, R>(
    x0: DVector<f64>,
    mut jac: J,
    mut res: R,
    s: Settings,
) -> Result<Outcome, SolveError>
where
    J: FnMut(&DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), SolveError>,
    R: FnMut(&DVector<f64>) -> Result<DVector<f64>, SolveError>,
{
    let mut x = x0;
    let mut trace = Vec::new();
    let (mut r, mut jm) = jac(&x)?;
    let mut norm = r.norm();
    trace.push(norm);
    let mut iterations = 0;
    let mut polish = 0;
    loop {
        let (delta, sv) = match s.step {
            StepKind::MinNormStep => {
                let (d, sv) = pinv_solve(&jm, &r, PINV_TOL);
                (-d, sv)
            }
            StepKind::MinNormSolution => {
                let rhs = &jm * &x - &r;
                let (y, sv) = pinv_solve(&jm, &rhs, PINV_TOL);
                (y - &x, sv)
            }
        };
        let rank = rank_of(&sv);
        let rows = jm.nrows();
        let sigma_min = if rows > jm.ncols() {
            0.0
        } else {
            sv.get(rows.saturating_sub(1)).copied().unwrap_or(0.0)
        };
        let outcome =
            |x: DVector<f64>, norm: f64, trace: Vec<f64>, iterations: usize, converged: bool| {
                Outcome {
                    x,
                    residual: norm,
                    iterations,
                    trace,
                    sigma_min,
                    sigma_max: sv.first().copied().unwrap_or(0.0),
                    rank,
                    rows,
                    converged,
                }
            };
        if norm < s.tol {
            // a few extra full steps settle the part of x the residual does not see
            let small = delta.norm() <= 1e-12 * (1.0 + x.norm());
            if small || polish >= 10 || s.step == StepKind::MinNormStep {
                return Ok(outcome(x, norm, trace, iterations, true));
            }
            let xn = &x + &delta;
            let rn = res(&xn)?;
            if rn.norm() >= s.tol {
                return Ok(outcome(x, norm, trace, iterations, true));
            }
            polish += 1;
            x = xn;
            let (r2, j2) = jac(&x)?;
            r = r2;
            jm = j2;
            norm = r.norm();
            continue;
        }
        if iterations >= s.max_iterations {
            return Ok(outcome(x, norm, trace, iterations, false));
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=s.max_halvings {
            let xn = &x + &delta * alpha;
            match res(&xn) {
                Ok(rn) if rn.norm().is_finite() && rn.norm() < norm => {
                    accepted = Some(xn);
                    break;
                }
                Ok(_) | Err(SolveError::Holo(_)) | Err(SolveError::Geometry(_)) => alpha *= 0.5,
                Err(e) => return Err(e),
            }
        }
        iterations += 1;
        let Some(xn) = accepted else {
            return Ok(outcome(x, norm, trace, iterations, false));
        };
        x = xn;
        let (r2, j2) = jac(&x)?;
        r = r2;
        jm = j2;
        norm = r.norm();
        trace.push(norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_underdetermined_quadratic() {
        // x0^2 + x1 = 3 with least-norm solution
        let jac = |x: &DVector<f64>| {
            Ok((
                DVector::from_row_slice(&[x[0] * x[0] + x[1] - 3.0]),
                DMatrix::from_row_slice(1, 2, &[2.0 * x[0], 1.0]),
            ))
        };
        let res = |x: &DVector<f64>| Ok(DVector::from_row_slice(&[x[0] * x[0] + x[1] - 3.0]));
        for step in [StepKind::MinNormStep, StepKind::MinNormSolution] {
            let out = gauss_newton(
                DVector::from_row_slice(&[1.0, 0.0]),
                jac,
                res,
                Settings {
                    tol: 1e-12,
                    max_iterations: 100,
                    max_halvings: 20,
                    step,
                },
            )
            .unwrap();
            assert!(out.converged, "{step:?}");
            assert!(out.residual < 1e-12);
        }
    }
}
