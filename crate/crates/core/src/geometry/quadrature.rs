use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{CircularDomain, GeometryError, HomologyLoop};
use crate::C64;

/// Quadrature controls shared by loop and path integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Initial number of equispaced samples on a loop; a power of two, at least 16.
    pub samples_per_loop: usize,
    /// Absolute tolerance (relative once the integral exceeds one in magnitude).
    pub path_tolerance: f64,
    /// Number of sample doublings before giving up.
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            samples_per_loop: 256,
            path_tolerance: 1e-12,
            max_refinements: 6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.samples_per_loop < 16 || !self.samples_per_loop.is_power_of_two() {
            return Err(GeometryError::InvalidQuadrature(format!(
                "samples_per_loop must be a power of two >= 16, got {}",
                self.samples_per_loop
            )));
        }
        if !(self.path_tolerance > 0.0) {
            return Err(GeometryError::InvalidQuadrature(
                "path_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Largest sample count a loop integral may reach.
    pub fn max_samples(&self) -> usize {
        self.samples_per_loop << self.max_refinements
    }
}

/// Result of an adaptive loop integral.
#[derive(Debug, Clone)]
pub struct LoopIntegral {
    pub value: Vec<C64>,
    /// Sample count of the accepted estimate.
    pub samples: usize,
    /// Difference between the last two estimates (max norm).
    pub last_change: f64,
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Periodic trapezoid sum over `n` equispaced samples starting at phase `offset / n`.
fn trapezoid_pass<E, F>(
    dim: usize,
    f: &mut F,
    lp: &HomologyLoop,
    n: usize,
    offset: f64,
    acc: &mut [C64],
) -> Result<(), E>
where
    F: FnMut(C64, &mut [C64]) -> Result<(), E>,
{
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    for k in 0..n {
        let t = (k as f64 + offset) / n as f64;
        let z = lp.point(t);
        let dz = lp.tangent(t);
        f(z, &mut buf)?;
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v * dz;
        }
    }
    Ok(())
}

/// `∮ F(z) dz` for a vector-valued integrand with exactly `n` samples.
pub fn contour_integral_fixed<E, F>(
    dim: usize,
    mut f: F,
    lp: &HomologyLoop,
    n: usize,
) -> Result<Vec<C64>, E>
where
    F: FnMut(C64, &mut [C64]) -> Result<(), E>,
{
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    trapezoid_pass(dim, &mut f, lp, n, 0.0, &mut acc)?;
    let w = 1.0 / n as f64;
    acc.iter_mut().for_each(|a| *a *= w);
    Ok(acc)
}

/// `∮ F(z) dz` for a vector-valued integrand by the periodic trapezoid rule,
/// doubling the sample count until two successive estimates agree.
pub fn contour_integral_vec<E, F>(
    dim: usize,
    mut f: F,
    lp: &HomologyLoop,
    quad: &QuadratureSpec,
) -> Result<LoopIntegral, E>
where
    F: FnMut(C64, &mut [C64]) -> Result<(), E>,
    E: From<GeometryError>,
{
    quad.validate()?;
    let mut n = quad.samples_per_loop;
    let mut sum = vec![C64::new(0.0, 0.0); dim];
    trapezoid_pass(dim, &mut f, lp, n, 0.0, &mut sum)?;
    let mut estimate: Vec<C64> = sum.iter().map(|s| s / n as f64).collect();
    let mut change = f64::INFINITY;
    for _ in 0..quad.max_refinements {
        // new samples sit halfway between the old ones
        trapezoid_pass(dim, &mut f, lp, n, 0.5, &mut sum)?;
        n *= 2;
        let next: Vec<C64> = sum.iter().map(|s| s / n as f64).collect();
        change = estimate
            .iter()
            .zip(&next)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()));
        estimate = next;
        if change < quad.path_tolerance * max_norm(&estimate).max(1.0) {
            return Ok(LoopIntegral {
                value: estimate,
                samples: n,
                last_change: change,
            });
        }
    }
    Err(GeometryError::NonConvergent {
        what: "contour integral",
        change,
    }
    .into())
}

/// `∮ F(z) dz` for a scalar integrand.
pub fn contour_integral<F>(
    f: F,
    lp: &HomologyLoop,
    quad: &QuadratureSpec,
) -> Result<C64, GeometryError>
where
    F: Fn(C64) -> C64,
{
    let r = contour_integral_vec::<GeometryError, _>(
        1,
        |z, out| {
            out[0] = f(z);
            Ok(())
        },
        lp,
        quad,
    )?;
    Ok(r.value[0])
}

/// A sampled polyline inside a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PathInDomain {
    points: Vec<C64>,
    closed: bool,
}

impl PathInDomain {
    /// Validates that every segment stays inside `domain`.
    pub fn new(
        points: Vec<C64>,
        closed: bool,
        domain: &CircularDomain,
    ) -> Result<Self, GeometryError> {
        let path = Self { points, closed };
        path.check_inside(domain)?;
        Ok(path)
    }

    pub fn segment(a: C64, b: C64, domain: &CircularDomain) -> Result<Self, GeometryError> {
        Self::new(vec![a, b], false, domain)
    }

    /// Polygonal approximation of a loop, `n` vertices, closed.
    pub fn around_loop(
        lp: &HomologyLoop,
        n: usize,
        domain: &CircularDomain,
    ) -> Result<Self, GeometryError> {
        let pts = (0..n).map(|k| lp.point(k as f64 / n as f64)).collect();
        Self::new(pts, true, domain)
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Concatenation; the end of `self` must coincide with the start of `other`.
    pub fn concat(&self, other: &PathInDomain) -> Option<PathInDomain> {
        let (Some(end), Some(start)) = (self.points.last(), other.points.first()) else {
            return None;
        };
        if (end - start).norm() > 1e-14 || self.closed || other.closed {
            return None;
        }
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points[1..]);
        Some(PathInDomain {
            points: pts,
            closed: false,
        })
    }

    fn segments(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        let n = self.points.len();
        let extra = if self.closed && n > 1 { 1 } else { 0 };
        (0..(n.saturating_sub(1) + extra)).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    fn check_inside(&self, domain: &CircularDomain) -> Result<(), GeometryError> {
        for (i, p) in self.points.iter().enumerate() {
            if !domain.contains(*p) {
                return Err(GeometryError::PathLeavesDomain {
                    index: i,
                    point: *p,
                });
            }
        }
        for (i, (a, b)) in self.segments().enumerate() {
            if !domain.segment_inside(a, b) {
                return Err(GeometryError::PathLeavesDomain {
                    index: i,
                    point: (a + b) * 0.5,
                });
            }
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(16))
}

/// 16-point Gauss–Legendre estimate of `∫_a^b F(z) dz` along the straight segment.
fn gl_segment<E, F>(dim: usize, f: &mut F, a: C64, b: C64, buf: &mut [C64]) -> Result<Vec<C64>, E>
where
    F: FnMut(C64, &mut [C64]) -> Result<(), E>,
{
    let (x, w) = gl16();
    let half = (b - a) * 0.5;
    let mid = (a + b) * 0.5;
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    for (xi, wi) in x.iter().zip(w) {
        f(mid + half * *xi, buf)?;
        for (s, v) in acc.iter_mut().zip(buf.iter()) {
            *s += v * *wi;
        }
    }
    acc.iter_mut().for_each(|s| *s *= half);
    Ok(acc)
}

/// Adaptive composite Gauss–Legendre along a straight segment (no domain check).
pub fn segment_integral_vec<E, F>(
    dim: usize,
    f: &mut F,
    a: C64,
    b: C64,
    quad: &QuadratureSpec,
) -> Result<Vec<C64>, E>
where
    F: FnMut(C64, &mut [C64]) -> Result<(), E>,
    E: From<GeometryError>,
{
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    let whole = gl_segment(dim, f, a, b, &mut buf)?;
    adapt(dim, f, a, b, whole, quad, 0, &mut buf)
}

#[allow(clippy::too_many_arguments)]
fn adapt<E, F>(
    dim: usize,
    f: &mut F,
    a: C64,
    b: C64,
    whole: Vec<C64>,
    quad: &QuadratureSpec,
    depth: usize,
    buf: &mut [C64],
) -> Result<Vec<C64>, E>
where
    F: FnMut(C64, &mut [C64]) -> Result<(), E>,
    E: From<GeometryError>,
{
    let m = (a + b) * 0.5;
    let left = gl_segment(dim, f, a, m, buf)?;
    let right = gl_segment(dim, f, m, b, buf)?;
    let halves: Vec<C64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    let change = whole
        .iter()
        .zip(&halves)
        .fold(0.0f64, |acc, (w, h)| acc.max((w - h).norm()));
    if change < quad.path_tolerance * max_norm(&halves).max(1.0) {
        return Ok(halves);
    }
    if depth >= 2 * quad.max_refinements + 8 {
        return Err(GeometryError::NonConvergent {
            what: "path integral",
            change,
        }
        .into());
    }
    let l = adapt(dim, f, a, m, left, quad, depth + 1, buf)?;
    let r = adapt(dim, f, m, b, right, quad, depth + 1, buf)?;
    Ok(l.iter().zip(&r).map(|(x, y)| x + y).collect())
}

/// `∫_path F(z) dz` by adaptive composite Gauss–Legendre on each segment.
pub fn path_integral_vec<E, F>(
    dim: usize,
    mut f: F,
    path: &PathInDomain,
    domain: &CircularDomain,
    quad: &QuadratureSpec,
) -> Result<Vec<C64>, E>
where
    F: FnMut(C64, &mut [C64]) -> Result<(), E>,
    E: From<GeometryError>,
{
    path.check_inside(domain)?;
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    for (a, b) in path.segments() {
        let seg = segment_integral_vec(dim, &mut f, a, b, quad)?;
        acc.iter_mut().zip(&seg).for_each(|(s, v)| *s += v);
    }
    Ok(acc)
}

/// Scalar form of [`path_integral_vec`].
pub fn path_integral<F>(
    f: F,
    path: &PathInDomain,
    domain: &CircularDomain,
    quad: &QuadratureSpec,
) -> Result<C64, GeometryError>
where
    F: Fn(C64) -> C64,
{
    let v = path_integral_vec::<GeometryError, _>(
        1,
        |z, out| {
            out[0] = f(z);
            Ok(())
        },
        path,
        domain,
        quad,
    )?;
    Ok(v[0])
}
