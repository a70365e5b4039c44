//! Immersions obtained by integrating null data, their verification, the
//! deformation families, spherical area of the Gauss image, and meshes.

mod area;
mod deform;
mod fd;
mod mesh;

pub use area::{
    spherical_area, spherical_area_estimate, stability_check, AreaEstimate, StabilityReport,
    Verdict,
};
pub use deform::{
    associated_family, flat_deformation_avoiding, nonflat_deformation, DeformationFamily,
    ExactnessFailure, FamilyKind, NonflatSample,
};
pub use fd::{
    conformality_residual, first_fundamental_form, gauss_residual, interior_nodes, normals,
    tangents,
};
pub use mesh::{affine_singular_values, export_mesh, rigid_align, to_csv, to_obj, Alignment};

use std::collections::VecDeque;

use serde::Serialize;

use crate::geometry::{segment_integral_vec, DomainGrid, GeometryError, QuadratureSpec};
use crate::holomorphic::{HoloError, Holomorphic};
use crate::nullcurve::{NullError, NullField};
use crate::periodsolver::{period_map, SolveError};
use crate::C64;

/// Largest accepted `|Re ∮ h f dz|` before integrating.
pub const CLOSURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SurfaceError {
    #[error("real periods do not vanish on loop {loop_index} (|Re P| = {magnitude:.3e})")]
    RealPeriodsNonzero { loop_index: usize, magnitude: f64 },
    #[error("complex periods do not vanish on loop {loop_index} (|P| = {magnitude:.3e})")]
    ComplexPeriodsNonzero { loop_index: usize, magnitude: f64 },
    #[error("not exact: {}", describe(.0))]
    ExactnessFailed(Vec<ExactnessFailure>),
    #[error("degenerate tangent plane at node {node} (z = {point})")]
    DegenerateCell { node: usize, point: C64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("operation needs dimension 3, got {0}")]
    NotThreeDimensional(usize),
    #[error("{what} vanishes at {point} inside the domain")]
    ZeroInDomain { what: &'static str, point: C64 },
    #[error("{what} did not converge (last change {change:.3e})")]
    NonConvergent { what: &'static str, change: f64 },
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Holo(#[from] HoloError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Null(#[from] NullError),
}

fn describe(v: &[ExactnessFailure]) -> String {
    v.iter()
        .map(|e| {
            format!(
                "{} on loop {} has period {}",
                e.form, e.loop_index, e.period
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// `X(p) = X(p₀) + 2 Re ∫_{p₀}^{p} h f dz` sampled on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ImmersionField {
    #[serde(skip)]
    pub grid: DomainGrid,
    /// One `ℝⁿ` value per grid node, grid-major.
    pub values: Vec<Vec<f64>>,
    pub basepoint: C64,
    pub base_value: Vec<f64>,
    /// `2 Re ∮ h f dz` on each homology loop.
    pub closure: Vec<Vec<f64>>,
}

impl ImmersionField {
    pub fn dim(&self) -> usize {
        self.base_value.len()
    }

    pub fn closure_residual(&self) -> f64 {
        self.closure
            .iter()
            .flatten()
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest pointwise distance to another field on the same grid.
    pub fn max_distance(&self, other: &ImmersionField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Breadth-first spanning tree of the grid's in-domain edges, as
/// `(parent, child)` pairs in visiting order.
fn spanning_tree(
    grid: &DomainGrid,
    edges: &[(usize, usize)],
    root: usize,
) -> Result<Vec<(usize, usize)>, SurfaceError> {
    let mut adj = vec![Vec::new(); grid.len()];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; grid.len()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    let mut tree = Vec::with_capacity(grid.len());
    while let Some(p) = queue.pop_front() {
        for &c in &adj[p] {
            if !seen[c] {
                seen[c] = true;
                tree.push((p, c));
                queue.push_back(c);
            }
        }
    }
    if tree.len() + 1 != grid.len() {
        return Err(SurfaceError::InvalidGrid(format!(
            "only {} of {} nodes reachable from the basepoint",
            tree.len() + 1,
            grid.len()
        )));
    }
    Ok(tree)
}

/// Integrates `h f` along a spanning tree of grid edges from `basepoint`.
///
/// The real periods are checked first; the field stores them as `closure`.
pub fn integrate_immersion(
    f: &dyn NullField,
    h: &dyn Holomorphic,
    grid: &DomainGrid,
    basepoint: C64,
    base_value: &[f64],
    quad: &QuadratureSpec,
) -> Result<ImmersionField, SurfaceError> {
    let n = f.dim();
    if base_value.len() != n {
        return Err(SurfaceError::InvalidGrid(format!(
            "base value has {} entries, data has {n}",
            base_value.len()
        )));
    }
    let domain = f.domain();
    let periods = period_map(f, h, &domain.loops(), quad)?;
    for (j, row) in periods.rows.iter().enumerate() {
        let magnitude = row.iter().fold(0.0, |a: f64, v| a.max(v.re.abs()));
        if magnitude > CLOSURE_TOL {
            return Err(SurfaceError::RealPeriodsNonzero {
                loop_index: j,
                magnitude,
            });
        }
    }
    let closure = periods
        .rows
        .iter()
        .map(|r| r.iter().map(|v| 2.0 * v.re).collect())
        .collect();
    let root = grid
        .nearest(basepoint)
        .ok_or_else(|| SurfaceError::InvalidGrid("grid has no nodes".into()))?;
    let nodes = grid.nodes();
    if !domain.segment_inside(basepoint, nodes[root]) {
        return Err(SurfaceError::InvalidGrid(format!(
            "basepoint {basepoint} cannot reach the grid"
        )));
    }
    let tree = spanning_tree(grid, &grid.edges(domain), root)?;
    let integrate = |a: C64, b: C64| -> Result<Vec<C64>, SurfaceError> {
        segment_integral_vec::<SurfaceError, _>(
            n,
            &mut |z, out: &mut [C64]| {
                f.eval_into(z, out)?;
                let hv = h.eval(z)?;
                out.iter_mut().for_each(|v| *v *= hv);
                Ok(())
            },
            a,
            b,
            quad,
        )
    };
    let threads = std::thread::available_parallelism()
        .map_or(1, |t| t.get())
        .min(16);
    let chunk = tree.len().div_ceil(threads).max(1);
    let increments: Vec<Vec<C64>> = std::thread::scope(|s| {
        let handles: Vec<_> = tree
            .chunks(chunk)
            .map(|part| {
                let integrate = &integrate;
                s.spawn(move || {
                    part.iter()
                        .map(|&(p, c)| integrate(nodes[p], nodes[c]))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("integration worker panicked"))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.into_iter().flatten().collect())
    })?;
    let mut values = vec![Vec::new(); grid.len()];
    let first = integrate(basepoint, nodes[root])?;
    values[root] = base_value
        .iter()
        .zip(&first)
        .map(|(b, v)| b + 2.0 * v.re)
        .collect();
    for (&(p, c), inc) in tree.iter().zip(&increments) {
        values[c] = values[p]
            .iter()
            .zip(inc)
            .map(|(x, v)| x + 2.0 * v.re)
            .collect();
    }
    Ok(ImmersionField {
        grid: grid.clone(),
        values,
        basepoint,
        base_value: base_value.to_vec(),
        closure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational;
    use crate::geometry::CircularDomain;
    use crate::holomorphic::{ExpMultiplier, RationalMap};
    use crate::nullcurve::{lift_weierstrass, NullData, WeierstrassPair};

    fn catenoid() -> NullData {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        lift_weierstrass(
            &WeierstrassPair::new(RationalMap::z(), parse_rational("1/z").unwrap()),
            &d,
        )
        .unwrap()
    }

    fn closed_form(z: C64) -> [f64; 3] {
        let r = z.norm();
        let t = z.arg();
        [
            -(r + 1.0 / r) * t.cos(),
            -(r + 1.0 / r) * t.sin(),
            2.0 * r.ln(),
        ]
    }

    #[test]
    fn catenoid_matches_closed_form() {
        let f = catenoid();
        let grid = DomainGrid::build(f.domain(), 12, 0.02).unwrap();
        let p0 = C64::new(0.6, 0.0);
        let base = closed_form(p0);
        let one = ExpMultiplier::identity(f.domain(), 0);
        let x =
            integrate_immersion(&f, &one, &grid, p0, &base, &QuadratureSpec::default()).unwrap();
        assert!(x.closure_residual() < 1e-10);
        for (z, v) in grid.nodes().iter().zip(&x.values) {
            let e = closed_form(*z);
            for k in 0..3 {
                assert!((v[k] - e[k]).abs() < 1e-9, "{z} {v:?} {e:?}");
            }
        }
    }

    #[test]
    fn planar_end_is_rejected() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let f = lift_weierstrass(
            &WeierstrassPair::new(RationalMap::z(), RationalMap::one()),
            &d,
        );
        // g = z needs phi3 to vanish at 0, which is in the hole, so the lift is valid
        let f = f.unwrap();
        let grid = DomainGrid::build(&d, 8, 0.02).unwrap();
        let one = ExpMultiplier::identity(&d, 0);
        let e = integrate_immersion(
            &f,
            &one,
            &grid,
            C64::new(0.6, 0.0),
            &[0.0; 3],
            &QuadratureSpec::default(),
        );
        match e {
            Err(SurfaceError::RealPeriodsNonzero {
                loop_index: 0,
                magnitude,
            }) => {
                assert!((magnitude - std::f64::consts::PI).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_direction_gives_a_plane() {
        let d = CircularDomain::disk();
        let f = NullData::new(
            vec![
                RationalMap::zero(),
                RationalMap::constant(C64::new(0.0, 1.0)),
                RationalMap::one(),
            ],
            d.clone(),
        )
        .unwrap();
        let grid = DomainGrid::build(&d, 8, 0.02).unwrap();
        let one = ExpMultiplier::identity(&d, 0);
        let x = integrate_immersion(
            &f,
            &one,
            &grid,
            C64::new(0.0, 0.0),
            &[0.0; 3],
            &QuadratureSpec::default(),
        )
        .unwrap();
        for (z, v) in grid.nodes().iter().zip(&x.values) {
            assert!(v[0].abs() < 1e-14);
            assert!((v[1] + 2.0 * z.im).abs() < 1e-13);
            assert!((v[2] - 2.0 * z.re).abs() < 1e-13);
        }
    }
}
