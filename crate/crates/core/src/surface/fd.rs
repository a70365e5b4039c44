use super::{ImmersionField, SurfaceError};
use crate::geometry::DomainGrid;
use crate::holomorphic::Holomorphic;
use crate::C64;

/// Antisymmetric central-difference weights `w_k` for half-widths 1..=4:
/// `u' ≈ Σ w_k (u_{+k} − u_{−k}) / Δ`.
const CENTERED: [&[f64]; 4] = [
    &[0.5],
    &[2.0 / 3.0, -1.0 / 12.0],
    &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
    &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
];

pub(crate) const MAX_HALF_WIDTH: usize = 4;

/// Nodes with a full centered stencil of the largest half-width any node has.
pub fn interior_nodes(grid: &DomainGrid) -> (Vec<usize>, usize) {
    for w in (1..=MAX_HALF_WIDTH).rev() {
        let nodes: Vec<usize> = (0..grid.len())
            .filter(|n| grid.has_full_stencil(*n, w))
            .collect();
        if !nodes.is_empty() {
            return (nodes, w);
        }
    }
    (Vec::new(), 0)
}

/// Derivative along a lattice axis (per unit lattice step) of `get`.
fn axis_derivative(
    grid: &DomainGrid,
    node: usize,
    axis: usize,
    max_hw: usize,
    dim: usize,
    get: &dyn Fn(usize) -> Vec<f64>,
) -> Option<Vec<f64>> {
    let hw = (1..=max_hw)
        .take_while(|k| {
            let k = *k as isize;
            grid.step(node, axis, k).is_some() && grid.step(node, axis, -k).is_some()
        })
        .last();
    let mut d = vec![0.0; dim];
    if let Some(hw) = hw {
        for (k, w) in CENTERED[hw - 1].iter().enumerate() {
            let k = k as isize + 1;
            let p = get(grid.step(node, axis, k)?);
            let m = get(grid.step(node, axis, -k)?);
            for i in 0..dim {
                d[i] += w * (p[i] - m[i]);
            }
        }
        return Some(d);
    }
    let x0 = get(node);
    for sign in [1isize, -1] {
        if let Some(a) = grid.step(node, axis, sign) {
            let x1 = get(a);
            match grid.step(node, axis, 2 * sign) {
                Some(b) => {
                    let x2 = get(b);
                    for i in 0..dim {
                        d[i] = sign as f64 * (-1.5 * x0[i] + 2.0 * x1[i] - 0.5 * x2[i]);
                    }
                }
                None => {
                    for i in 0..dim {
                        d[i] = sign as f64 * (x1[i] - x0[i]);
                    }
                }
            }
            return Some(d);
        }
    }
    None
}

/// `(X_x, X_y)` at a node, from lattice differences and the chain rule.
pub fn tangents(
    field: &ImmersionField,
    node: usize,
    max_hw: usize,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let grid = &field.grid;
    let n = field.dim();
    let xv = |k: usize| field.values[k].clone();
    let zv = |k: usize| {
        let z = grid.nodes()[k];
        vec![z.re, z.im]
    };
    let xu = axis_derivative(grid, node, 0, max_hw, n, &xv)?;
    let xvv = axis_derivative(grid, node, 1, max_hw, n, &xv)?;
    let zu = axis_derivative(grid, node, 0, max_hw, 2, &zv)?;
    let zvv = axis_derivative(grid, node, 1, max_hw, 2, &zv)?;
    // [X_u X_v] = [X_x X_y] M,  M = [[x_u, x_v], [y_u, y_v]]
    let det = zu[0] * zvv[1] - zvv[0] * zu[1];
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = [[zvv[1] / det, -zvv[0] / det], [-zu[1] / det, zu[0] / det]];
    let dx = (0..n)
        .map(|i| xu[i] * inv[0][0] + xvv[i] * inv[1][0])
        .collect();
    let dy = (0..n)
        .map(|i| xu[i] * inv[0][1] + xvv[i] * inv[1][1])
        .collect();
    Some((dx, dy))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

type NodeTangents = (usize, Vec<f64>, Vec<f64>);

fn interior_tangents(field: &ImmersionField) -> Result<Vec<NodeTangents>, SurfaceError> {
    let (nodes, hw) = interior_nodes(&field.grid);
    if nodes.is_empty() {
        return Err(SurfaceError::InvalidGrid("no interior nodes".into()));
    }
    nodes
        .into_iter()
        .map(|k| {
            let (dx, dy) = tangents(field, k, hw).ok_or(SurfaceError::DegenerateCell {
                node: k,
                point: field.grid.nodes()[k],
            })?;
            if dot(&dx, &dx) + dot(&dy, &dy) < 1e-16 {
                return Err(SurfaceError::DegenerateCell {
                    node: k,
                    point: field.grid.nodes()[k],
                });
            }
            Ok((k, dx, dy))
        })
        .collect()
}

/// `max (|E − G| + 2|F|) / (E + G)` over interior nodes.
pub fn conformality_residual(field: &ImmersionField) -> Result<f64, SurfaceError> {
    Ok(interior_tangents(field)?
        .iter()
        .map(|(_, dx, dy)| {
            let e = dot(dx, dx);
            let g = dot(dy, dy);
            ((e - g).abs() + 2.0 * dot(dx, dy).abs()) / (e + g)
        })
        .fold(0.0, f64::max))
}

/// `(E, F, G)` at interior nodes.
pub fn first_fundamental_form(
    field: &ImmersionField,
) -> Result<Vec<(usize, [f64; 3])>, SurfaceError> {
    Ok(interior_tangents(field)?
        .into_iter()
        .map(|(k, dx, dy)| (k, [dot(&dx, &dx), dot(&dx, &dy), dot(&dy, &dy)]))
        .collect())
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit normals `X_x × X_y / |X_x × X_y|` at every node, zero where undefined.
pub fn normals(field: &ImmersionField) -> Result<Vec<[f64; 3]>, SurfaceError> {
    if field.dim() != 3 {
        return Err(SurfaceError::NotThreeDimensional(field.dim()));
    }
    Ok((0..field.grid.len())
        .map(|k| match tangents(field, k, MAX_HALF_WIDTH) {
            Some((dx, dy)) => {
                let c = cross(&dx, &dy);
                let l = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                if l > 0.0 {
                    [c[0] / l, c[1] / l, c[2] / l]
                } else {
                    [0.0; 3]
                }
            }
            None => [0.0; 3],
        })
        .collect())
}

/// Largest chordal-style distance between the stereographic projection of
/// the normal and `g(z)` over interior nodes. Where `|g| > 1` the
/// comparison uses `1/g` and the projection from the other pole.
pub fn gauss_residual(field: &ImmersionField, g: &dyn Holomorphic) -> Result<f64, SurfaceError> {
    if field.dim() != 3 {
        return Err(SurfaceError::NotThreeDimensional(field.dim()));
    }
    let mut worst = 0.0f64;
    for (k, dx, dy) in interior_tangents(field)? {
        let c = cross(&dx, &dy);
        let l = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if l == 0.0 {
            return Err(SurfaceError::DegenerateCell {
                node: k,
                point: field.grid.nodes()[k],
            });
        }
        let nv = [c[0] / l, c[1] / l, c[2] / l];
        let gz = g.eval(field.grid.nodes()[k])?;
        let r = if gz.norm() <= 1.0 {
            let p = C64::new(nv[0], nv[1]) / (1.0 - nv[2]);
            (p - gz).norm() / (1.0 + gz.norm())
        } else {
            let p = C64::new(nv[0], -nv[1]) / (1.0 + nv[2]);
            let inv = gz.inv();
            (p - inv).norm() / (1.0 + inv.norm())
        };
        worst = worst.max(if r.is_finite() { r } else { f64::INFINITY });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational;
    use crate::geometry::{CircularDomain, QuadratureSpec};
    use crate::holomorphic::{ExpMultiplier, RationalMap};
    use crate::nullcurve::{lift_weierstrass, NullData, WeierstrassPair};
    use crate::surface::integrate_immersion;

    fn catenoid_field(res: usize) -> ImmersionField {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let f = lift_weierstrass(
            &WeierstrassPair::new(RationalMap::z(), parse_rational("1/z").unwrap()),
            &d,
        )
        .unwrap();
        let grid = DomainGrid::build(&d, res, 0.02).unwrap();
        let one = ExpMultiplier::identity(&d, 0);
        integrate_immersion(
            &f,
            &one,
            &grid,
            C64::new(0.6, 0.0),
            &[0.0; 3],
            &QuadratureSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn stencil_weights_differentiate_polynomials() {
        for (hw, w) in CENTERED.iter().enumerate() {
            let order = 2 * (hw + 1);
            for p in 1..=order {
                let d: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        c * (((k + 1) as f64).powi(p as i32) - (-((k + 1) as f64)).powi(p as i32))
                    })
                    .sum();
                let expect = if p == 1 { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12, "hw {} p {p}", hw + 1);
            }
        }
    }

    #[test]
    fn catenoid_is_conformal_with_gauss_map_z() {
        let x = catenoid_field(32);
        assert!(conformality_residual(&x).unwrap() < 1e-6);
        assert!(gauss_residual(&x, &RationalMap::z()).unwrap() < 1e-6);
        let z2 = RationalMap::z().mul(&RationalMap::z());
        assert!(gauss_residual(&x, &z2).unwrap() > 0.1);
    }

    #[test]
    fn cubic_corruption_is_detected() {
        let mut x = catenoid_field(16);
        for (v, z) in x.values.iter_mut().zip(x.grid.nodes()) {
            v[0] += z.re.powi(3);
        }
        assert!(conformality_residual(&x).unwrap() > 1e-2);
    }

    #[test]
    fn flat_field_is_exactly_conformal() {
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
        assert!(conformality_residual(&x).unwrap() < 1e-10);
        let g = RationalMap::one();
        assert!(gauss_residual(&x, &g).unwrap() < 1e-8);
    }

    #[test]
    fn normals_have_unit_length() {
        let x = catenoid_field(8);
        for n in normals(&x).unwrap() {
            assert!(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs() < 1e-12);
        }
    }
}
