use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::newton::{gauss_newton, Settings, StepKind};
use super::{SolveError, SolveOptions};
use crate::geometry::{contour_integral_vec, CircularDomain};
use crate::holomorphic::{ExpMultiplier, LaurentExpansion};
use crate::linalg::{complexify, realify, realify_vec};
use crate::C64;

/// Smallest accepted norm of the nonconstant part of `u`.
const MIN_NONCONSTANT: f64 = 0.1;

/// Nowhere-vanishing `g = exp(u)` with prescribed periods of `g dz` and `g² dz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gg2Solution {
    pub g: ExpMultiplier,
    /// `(∮ g dz, ∮ g² dz)` per loop.
    pub periods: Vec<(C64, C64)>,
    pub residual: f64,
    pub iterations: usize,
    pub sigma_min: f64,
}

/// `(∮ g dz, ∮ g² dz)` and their coefficient derivatives, per loop.
type LoopMoments = Vec<(C64, C64, Vec<C64>, Vec<C64>)>;

fn integrate(
    domain: &CircularDomain,
    u: &LaurentExpansion,
    with_jacobian: bool,
    opts: &SolveOptions,
) -> Result<LoopMoments, SolveError> {
    let k = if with_jacobian { u.len() } else { 0 };
    domain
        .loops()
        .iter()
        .map(|lp| {
            let mut basis = vec![C64::new(0.0, 0.0); u.len()];
            let r = contour_integral_vec::<SolveError, _>(
                2 + 2 * k,
                |z, out| {
                    let g = u.eval(z).exp();
                    out[0] = g;
                    out[1] = g * g;
                    if k > 0 {
                        u.basis_values(z, &mut basis);
                        for (c, b) in basis.iter().enumerate() {
                            out[2 + c] = g * b;
                            out[2 + k + c] = 2.0 * g * g * b;
                        }
                    }
                    Ok(())
                },
                lp,
                &opts.quad,
            )?;
            let v = r.value;
            Ok((v[0], v[1], v[2..2 + k].to_vec(), v[2 + k..].to_vec()))
        })
        .collect()
}

/// Gauss–Newton on the Laurent coefficients of `u` for the map
/// `u ↦ (∮ e^u dz, ∮ e^{2u} dz)` on every loop, started from a nonconstant seed.
pub fn solve_gg2(
    domain: &CircularDomain,
    targets: &[(C64, C64)],
    opts: &SolveOptions,
) -> Result<Gg2Solution, SolveError> {
    let loops = domain.loops();
    if targets.len() != loops.len() {
        return Err(SolveError::DimensionMismatch(format!(
            "{} target pairs for {} loops",
            targets.len(),
            loops.len()
        )));
    }
    let mut u = LaurentExpansion::zero(domain, opts.degree.max(1));
    let mut seed = u.coefficients();
    seed[1] = C64::new(0.3, 0.0);
    let d = u.degree();
    for j in 0..loops.len() {
        seed[d + 1 + j * d] = C64::new(0.3, 0.0);
    }
    u.set_coefficients(&seed);
    if loops.is_empty() {
        let mut e = LaurentExpansion::zero(domain, 1);
        e.set_coefficients(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        return Ok(Gg2Solution {
            g: ExpMultiplier::new(e),
            periods: Vec::new(),
            residual: 0.0,
            iterations: 0,
            sigma_min: 0.0,
        });
    }
    let residual_of = |parts: &[(C64, C64, Vec<C64>, Vec<C64>)]| -> Vec<C64> {
        parts
            .iter()
            .zip(targets)
            .flat_map(|(p, t)| [p.0 - t.0, p.1 - t.1])
            .collect()
    };
    loop {
        let template = u.clone();
        let with = |x: &DVector<f64>| {
            let mut v = template.clone();
            v.set_coefficients(&complexify(x));
            v
        };
        let out = gauss_newton(
            realify_vec(&u.coefficients()),
            |x| {
                let parts = integrate(domain, &with(x), true, opts)?;
                let k = template.len();
                let jac = DMatrix::from_fn(2 * parts.len(), k, |i, c| {
                    let p = &parts[i / 2];
                    if i % 2 == 0 {
                        p.2[c]
                    } else {
                        p.3[c]
                    }
                });
                Ok((realify_vec(&residual_of(&parts)), realify(&jac)))
            },
            |x| {
                Ok(realify_vec(&residual_of(&integrate(
                    domain,
                    &with(x),
                    false,
                    opts,
                )?)))
            },
            Settings {
                tol: opts.tol,
                max_iterations: opts.max_iterations,
                max_halvings: opts.max_halvings,
                step: StepKind::MinNormStep,
            },
        )?;
        let un = with(&out.x);
        if out.converged {
            let norm = un.nonconstant_norm();
            if norm < MIN_NONCONSTANT {
                return Err(SolveError::Degenerate { norm });
            }
            let parts = integrate(domain, &un, false, opts)?;
            let residual = residual_of(&parts)
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                .sqrt();
            return Ok(Gg2Solution {
                g: ExpMultiplier::new(un),
                periods: parts.iter().map(|p| (p.0, p.1)).collect(),
                residual,
                iterations: out.iterations,
                sigma_min: out.sigma_min,
            });
        }
        if un.degree() >= opts.max_degree {
            return Err(SolveError::MaxIterations {
                iterations: out.iterations,
                residual: out.residual,
                sigma_min: out.sigma_min,
            });
        }
        u = un.with_degree((2 * un.degree()).min(opts.max_degree));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Hole;
    use crate::holomorphic::Holomorphic;

    #[test]
    fn zero_targets_on_annulus() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let s = solve_gg2(
            &d,
            &[(C64::new(0.0, 0.0), C64::new(0.0, 0.0))],
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(s.residual < 1e-9);
        assert!(s.g.u.nonconstant_norm() >= 0.1);
        let a = s.g.eval(C64::new(0.5, 0.0)).unwrap();
        let b = s.g.eval(C64::new(-0.5, 0.2)).unwrap();
        assert!((a - b).norm() > 1e-3);
    }

    #[test]
    fn residue_target_on_annulus() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let t = (C64::new(0.0, std::f64::consts::TAU), C64::new(0.0, 0.0));
        let s = solve_gg2(&d, &[t], &SolveOptions::default()).unwrap();
        assert!(s.residual < 1e-9);
    }

    #[test]
    fn disk_accepts_exponential() {
        let s = solve_gg2(&CircularDomain::disk(), &[], &SolveOptions::default()).unwrap();
        let z = C64::new(0.3, 0.1);
        assert!((s.g.eval(z).unwrap() - z.exp()).norm() < 1e-15);
    }

    #[test]
    fn two_holes_zero_targets() {
        let d = CircularDomain::new(vec![
            Hole::new(C64::new(-0.5, 0.0), 0.1),
            Hole::new(C64::new(0.5, 0.0), 0.1),
        ])
        .unwrap();
        let z = C64::new(0.0, 0.0);
        let s = solve_gg2(&d, &[(z, z), (z, z)], &SolveOptions::default()).unwrap();
        assert!(s.residual < 1e-9);
    }
}
