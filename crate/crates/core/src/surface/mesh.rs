use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::fd::normals;
use super::{ImmersionField, SurfaceError};

/// ASCII OBJ with one vertex and normal per grid node (grid-major) and two
/// triangles per lattice quad.
pub fn to_obj(field: &ImmersionField) -> Result<String, SurfaceError> {
    if field.dim() != 3 {
        return Err(SurfaceError::NotThreeDimensional(field.dim()));
    }
    let faces = field.grid.faces();
    if field.grid.len() < 3 || faces.is_empty() {
        return Err(SurfaceError::InvalidGrid("no faces to export".into()));
    }
    let nrm = normals(field)?;
    let mut s = String::new();
    for v in &field.values {
        writeln!(s, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]).unwrap();
    }
    for n in &nrm {
        writeln!(s, "vn {:.16e} {:.16e} {:.16e}", n[0], n[1], n[2]).unwrap();
    }
    for [a, b, c, d] in faces {
        let (a, b, c, d) = (a + 1, b + 1, c + 1, d + 1);
        writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}").unwrap();
        writeln!(s, "f {a}//{a} {c}//{c} {d}//{d}").unwrap();
    }
    Ok(s)
}

/// Point cloud: domain point and `X` per node.
pub fn to_csv(field: &ImmersionField) -> String {
    let mut s = String::from("re,im");
    for k in 0..field.dim() {
        write!(s, ",x{}", k + 1).unwrap();
    }
    s.push('\n');
    for (z, v) in field.grid.nodes().iter().zip(&field.values) {
        write!(s, "{:.16e},{:.16e}", z.re, z.im).unwrap();
        for x in v {
            write!(s, ",{x:.16e}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Writes OBJ for `n = 3` and CSV otherwise.
pub fn export_mesh(field: &ImmersionField, path: &Path) -> Result<(), SurfaceError> {
    let text = if field.dim() == 3 {
        to_obj(field)?
    } else {
        to_csv(field)
    };
    std::fs::write(path, text).map_err(|e| SurfaceError::Io(format!("{}: {e}", path.display())))
}

/// Best rotation and translation taking `a` onto `b` in least squares.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub rotation: DMatrix<f64>,
    pub translation: DVector<f64>,
    /// Largest distance between aligned `a` and `b`.
    pub max_deviation: f64,
}

fn to_matrix(p: &[Vec<f64>]) -> DMatrix<f64> {
    let n = p.first().map_or(0, |v| v.len());
    DMatrix::from_fn(p.len(), n, |i, j| p[i][j])
}

fn centroid(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(m.ncols(), |j, _| m.column(j).mean())
}

/// Kabsch alignment of point clouds of equal size.
pub fn rigid_align(a: &[Vec<f64>], b: &[Vec<f64>]) -> Alignment {
    assert_eq!(a.len(), b.len());
    let (ma, mb) = (to_matrix(a), to_matrix(b));
    let (ca, cb) = (centroid(&ma), centroid(&mb));
    let n = ma.ncols();
    let mut pa = ma.clone();
    let mut pb = mb.clone();
    for mut r in pa.row_iter_mut() {
        r -= ca.transpose();
    }
    for mut r in pb.row_iter_mut() {
        r -= cb.transpose();
    }
    let svd = (pa.transpose() * &pb).svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v");
    let mut d = DMatrix::identity(n, n);
    if (vt.transpose() * u.transpose()).determinant() < 0.0 {
        d[(n - 1, n - 1)] = -1.0;
    }
    let rotation = vt.transpose() * d * u.transpose();
    let translation = &cb - &rotation * &ca;
    let max_deviation = (0..ma.nrows())
        .map(|i| (&rotation * ma.row(i).transpose() + &translation - mb.row(i).transpose()).norm())
        .fold(0.0, f64::max);
    Alignment {
        rotation,
        translation,
        max_deviation,
    }
}

/// Singular values of the centered point cloud, largest first.
pub fn affine_singular_values(points: &[Vec<f64>]) -> Vec<f64> {
    let mut m = to_matrix(points);
    let c = centroid(&m);
    for mut r in m.row_iter_mut() {
        r -= c.transpose();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational;
    use crate::geometry::{CircularDomain, DomainGrid, QuadratureSpec};
    use crate::holomorphic::{ExpMultiplier, RationalMap};
    use crate::nullcurve::{lift_weierstrass, WeierstrassPair};
    use crate::surface::integrate_immersion;
    use crate::C64;

    fn field(res: usize) -> ImmersionField {
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
    fn obj_counts_and_determinism() {
        let x = field(6);
        let a = to_obj(&x).unwrap();
        let v = a.lines().filter(|l| l.starts_with("v ")).count();
        let f = a.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(v, x.grid.len());
        assert_eq!(f, 2 * x.grid.faces().len());
        assert_eq!(a, to_obj(&x.clone()).unwrap());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let x = field(4);
        let s = to_csv(&x);
        assert_eq!(s.lines().next().unwrap(), "re,im,x1,x2,x3");
        assert_eq!(s.lines().count(), x.grid.len() + 1);
    }

    #[test]
    fn alignment_recovers_rotation() {
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|k| {
                let t = k as f64;
                vec![t.sin(), (2.0 * t).cos(), 0.1 * t]
            })
            .collect();
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| vec![c * p[0] - s * p[1] + 1.0, s * p[0] + c * p[1], p[2] - 2.0])
            .collect();
        let al = rigid_align(&pts, &moved);
        assert!(al.max_deviation < 1e-12);
        assert!((al.rotation.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn planar_cloud_has_two_singular_values() {
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|k| {
                let t = k as f64 * 0.37;
                vec![t.cos(), t.sin() + t, t.cos() - 2.0 * (t.sin() + t)]
            })
            .collect();
        let s = affine_singular_values(&pts);
        assert!(s[2] < 1e-12 * s[0]);
    }
}
