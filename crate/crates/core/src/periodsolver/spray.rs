use nalgebra::DMatrix;

use super::SolveError;
use crate::geometry::{contour_integral_vec, HomologyLoop, QuadratureSpec};
use crate::holomorphic::{RationalMap, SprayMultiplier};
use crate::linalg::{column_rank, singular_values};
use crate::nullcurve::{NullField, RANK_TOL};
use crate::C64;

const CANDIDATES: usize = 64;
/// Outer anchors sit on this circle, outside the closed unit disk.
const OUTER_ANCHOR_RADIUS: f64 = 1.5;

/// Circular distance between two parameters in `[0, 1)`.
fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Greedy farthest-in-angle selection of `count` parameters on `lp` whose
/// values of `f` raise the rank at each step until it reaches `f.dim()`.
fn select_points(
    f: &dyn NullField,
    lp: &HomologyLoop,
    count: usize,
) -> Result<Vec<f64>, SolveError> {
    let n = f.dim();
    let ts: Vec<f64> = (0..CANDIDATES)
        .map(|k| k as f64 / CANDIDATES as f64)
        .collect();
    let vals = ts
        .iter()
        .map(|t| f.eval(lp.point(*t)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut chosen: Vec<usize> = Vec::new();
    let mut rejected = [false; CANDIDATES];
    let mut rank = 0;
    while chosen.len() < count {
        let next = (0..CANDIDATES)
            .filter(|k| !rejected[*k] && !chosen.contains(k))
            .max_by(|a, b| {
                let da = chosen
                    .iter()
                    .map(|c| circ(ts[*a], ts[*c]))
                    .fold(1.0, f64::min);
                let db = chosen
                    .iter()
                    .map(|c| circ(ts[*b], ts[*c]))
                    .fold(1.0, f64::min);
                da.total_cmp(&db).then(b.cmp(a))
            });
        let Some(k) = next else {
            return Err(SolveError::SpanSelectionFailed(format!(
                "only rank {rank} reached on loop centered at {}",
                lp.center
            )));
        };
        if rank < n {
            let mut cols: Vec<Vec<C64>> = chosen.iter().map(|c| vals[*c].clone()).collect();
            cols.push(vals[k].clone());
            let r = column_rank(&cols, n, RANK_TOL);
            if r <= rank {
                rejected[k] = true;
                continue;
            }
            rank = r;
        }
        chosen.push(k);
    }
    Ok(chosen.iter().map(|k| ts[*k]).collect())
}

/// Period-dominating spray for `f`: for each loop, `dim` points where the
/// values of `f` span, each carrying a kernel
/// `1/(z − w_in) − 1/(z − w_out)` anchored on the ray through the point,
/// inside the hole and outside the unit disk. Extra factors beyond
/// `dim · loops` are spread round-robin over the loops.
pub fn build_spray(f: &dyn NullField, count: usize) -> Result<SprayMultiplier, SolveError> {
    let domain = f.domain();
    let loops = domain.loops();
    let n = f.dim();
    if loops.is_empty() {
        return Ok(SprayMultiplier::new(Vec::new()));
    }
    if count < n * loops.len() {
        return Err(SolveError::DimensionMismatch(format!(
            "spray needs at least {} factors, got {count}",
            n * loops.len()
        )));
    }
    let mut cols = Vec::new();
    for lp in &loops {
        for k in 0..CANDIDATES {
            cols.push(f.eval(lp.point(k as f64 / CANDIDATES as f64))?);
        }
    }
    let rank = column_rank(&cols, n, RANK_TOL);
    if rank < n {
        return Err(SolveError::NotFull { rank, dim: n });
    }
    let mut basis = Vec::with_capacity(count);
    for (j, (lp, hole)) in loops.iter().zip(domain.holes()).enumerate() {
        let extra = (count - n * loops.len() + loops.len() - 1 - j) / loops.len();
        for t in select_points(f, lp, n + extra)? {
            let dir = C64::from_polar(1.0, std::f64::consts::TAU * t);
            let w_in = hole.center + dir * (0.5 * hole.radius);
            let b = (hole.center.conj() * dir).re;
            let reach = -b + (b * b - hole.center.norm_sqr() + OUTER_ANCHOR_RADIUS.powi(2)).sqrt();
            let w_out = hole.center + dir * reach;
            basis.push(RationalMap::cauchy(w_in).sub(&RationalMap::cauchy(w_out)));
        }
    }
    Ok(SprayMultiplier::new(basis))
}

/// Derivative at `ζ = 0` of the periods of `Ξ(ζ, ·) f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayJacobian {
    /// `(dim · loops) x N`, rows loop-major.
    pub matrix: DMatrix<C64>,
    pub singular_values: Vec<f64>,
    /// Smallest of the `dim · loops` leading singular values (0 if there are fewer columns).
    pub sigma_min: f64,
    pub rank: usize,
}

/// Column `i` stacks `∮_{C_j} g_i f dz` over the loops.
pub fn spray_jacobian(
    f: &dyn NullField,
    spray: &SprayMultiplier,
    quad: &QuadratureSpec,
) -> Result<SprayJacobian, SolveError> {
    let loops = f.domain().loops();
    let n = f.dim();
    let m = spray.len();
    let rows = n * loops.len();
    let mut matrix = DMatrix::zeros(rows, m);
    for (j, lp) in loops.iter().enumerate() {
        let mut fv = vec![C64::new(0.0, 0.0); n];
        let r = contour_integral_vec::<SolveError, _>(
            n * m,
            |z, out| {
                f.eval_into(z, &mut fv)?;
                for (i, g) in spray.basis.iter().enumerate() {
                    let gv = g.eval(z)?;
                    for k in 0..n {
                        out[i * n + k] = gv * fv[k];
                    }
                }
                Ok(())
            },
            lp,
            quad,
        )?;
        for i in 0..m {
            for k in 0..n {
                matrix[(j * n + k, i)] = r.value[i * n + k];
            }
        }
    }
    let s = singular_values(&matrix);
    let sigma_min = if rows == 0 || m < rows {
        0.0
    } else {
        s[rows - 1]
    };
    let top = s.first().copied().unwrap_or(0.0);
    let rank = s
        .iter()
        .filter(|v| top > 0.0 && **v > RANK_TOL * top)
        .count();
    Ok(SprayJacobian {
        matrix,
        singular_values: s,
        sigma_min,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational;
    use crate::geometry::CircularDomain;
    use crate::nullcurve::{lift_weierstrass, NullData, WeierstrassPair};

    fn catenoid() -> NullData {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        lift_weierstrass(
            &WeierstrassPair::new(RationalMap::z(), parse_rational("1/z").unwrap()),
            &d,
        )
        .unwrap()
    }

    #[test]
    fn catenoid_spray_dominates() {
        let f = catenoid();
        let spray = build_spray(&f, 3).unwrap();
        assert_eq!(spray.len(), 3);
        let j = spray_jacobian(&f, &spray, &QuadratureSpec::default()).unwrap();
        assert_eq!(j.rank, 3);
        assert!(j.sigma_min > 1e-3, "{}", j.sigma_min);
    }

    #[test]
    fn duplicated_anchors_are_near_singular() {
        let f = catenoid();
        let spray = build_spray(&f, 3).unwrap();
        let dup = SprayMultiplier::new(vec![
            spray.basis[0].clone(),
            spray.basis[0].clone(),
            spray.basis[1].clone(),
        ]);
        let j = spray_jacobian(&f, &dup, &QuadratureSpec::default()).unwrap();
        assert!(j.sigma_min < 1e-10);
    }

    #[test]
    fn degenerate_data_is_not_full() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let z = RationalMap::z();
        let f = NullData::new(
            vec![z.clone(), z.scale(C64::new(0.0, 1.0)), RationalMap::zero()],
            d,
        )
        .unwrap();
        assert!(matches!(
            build_spray(&f, 3),
            Err(SolveError::NotFull { rank: 1, dim: 3 })
        ));
    }

    #[test]
    fn simply_connected_spray_is_empty() {
        let f = catenoid().on_domain(CircularDomain::disk());
        let s = build_spray(&f, 0).unwrap();
        assert!(s.is_empty());
        let j = spray_jacobian(&f, &s, &QuadratureSpec::default()).unwrap();
        assert_eq!(j.matrix.shape(), (0, 0));
    }

    #[test]
    fn jacobian_scales_with_data() {
        let f = catenoid();
        let spray = build_spray(&f, 3).unwrap();
        let q = QuadratureSpec::default();
        let a = spray_jacobian(&f, &spray, &q).unwrap().sigma_min;
        let b = spray_jacobian(
            &f.scaled(&RationalMap::constant(C64::new(0.0, 2.5))),
            &spray,
            &q,
        )
        .unwrap()
        .sigma_min;
        assert!((b - 2.5 * a).abs() < 1e-10 * b);
    }
}
