use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::SurfaceError;
use crate::geometry::CircularDomain;
use crate::holomorphic::RationalMap;
use crate::C64;

/// Stop refining once successive extrapolated values agree to this relative change.
const AREA_TOL: f64 = 1e-9;
const MAX_LEVELS: usize = 7;

/// `4|g′|²/(1+|g|²)² = 4|N′D − ND′|²/(|D|²+|N|²)²` for `g = N/D`, finite at poles of `g`.
fn density(g: &RationalMap, z: C64) -> f64 {
    let (n, dn) = g.num().eval_with_derivative(z);
    let (d, dd) = g.den().eval_with_derivative(z);
    let w = (n.norm_sqr() + d.norm_sqr()).powi(2);
    4.0 * (dn * d - n * dd).norm_sqr() / w
}

/// Polar midpoint rule on a disk with `m` radial and `4m` angular cells.
fn disk_midpoint(g: &RationalMap, center: C64, radius: f64, m: usize) -> f64 {
    let dr = radius / m as f64;
    let na = 4 * m;
    let da = TAU / na as f64;
    let mut acc = 0.0;
    for i in 0..m {
        let r = (i as f64 + 0.5) * dr;
        let mut ring = 0.0;
        for j in 0..na {
            ring += density(g, center + C64::from_polar(r, (j as f64 + 0.5) * da));
        }
        acc += ring * r;
    }
    acc * dr * da
}

/// Area with its estimated error and the number of refinements used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaEstimate {
    pub area: f64,
    pub error: f64,
    pub levels: usize,
}

/// Spherical area of `g` over the domain, counted with multiplicity:
/// the unit disk integral minus the hole integrals, each by a polar
/// midpoint rule doubled from `resolution` cells with Richardson
/// extrapolation.
pub fn spherical_area_estimate(
    g: &RationalMap,
    domain: &CircularDomain,
    resolution: usize,
) -> Result<AreaEstimate, SurfaceError> {
    let m0 = resolution.max(2);
    let level = |m: usize| {
        let mut a = disk_midpoint(g, C64::new(0.0, 0.0), CircularDomain::OUTER_RADIUS, m);
        for h in domain.holes() {
            a -= disk_midpoint(g, h.center, h.radius, m);
        }
        a
    };
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut change = f64::INFINITY;
    for k in 0..MAX_LEVELS {
        let mut row = vec![level(m0 << k)];
        for j in 1..=k {
            let prev = table[k - 1][j - 1];
            let cur = row[j - 1];
            row.push(cur + (cur - prev) / (4f64.powi(j as i32) - 1.0));
        }
        if k > 0 {
            let best = row[k];
            change = (best - table[k - 1][k - 1]).abs();
            if change <= AREA_TOL * best.abs() {
                table.push(row);
                return Ok(AreaEstimate {
                    area: best.max(0.0),
                    error: change,
                    levels: k + 1,
                });
            }
        }
        table.push(row);
    }
    Err(SurfaceError::NonConvergent {
        what: "spherical area",
        change,
    })
}

/// `∬ 4|g′|²/(1+|g|²)² dA` over the domain.
pub fn spherical_area(
    g: &RationalMap,
    domain: &CircularDomain,
    resolution: usize,
) -> Result<f64, SurfaceError> {
    spherical_area_estimate(g, domain, resolution).map(|a| a.area)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    NotConcluded,
}

/// Outcome of the spherical-area stability criterion, a sufficient condition only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub spherical_area: f64,
    pub area_error: f64,
    /// `spherical_area + area_error < 2π`, with the error floored at rounding level.
    pub stable_by_area_criterion: bool,
    pub verdict: Verdict,
    /// Unit normals `(2 Re g, 2 Im g, |g|² − 1) / (|g|² + 1)` at sample points of the domain.
    pub gauss_image_sample: Vec<[f64; 3]>,
}

fn sphere_point(w: C64) -> [f64; 3] {
    let s = w.norm_sqr();
    if !s.is_finite() {
        return [0.0, 0.0, 1.0];
    }
    [
        2.0 * w.re / (s + 1.0),
        2.0 * w.im / (s + 1.0),
        (s - 1.0) / (s + 1.0),
    ]
}

pub fn stability_check(
    g: &RationalMap,
    domain: &CircularDomain,
    resolution: usize,
) -> Result<StabilityReport, SurfaceError> {
    let est = spherical_area_estimate(g, domain, resolution)?;
    let margin = est.error.max(1e-12 * est.area.max(1.0));
    let stable = est.area + margin < TAU;
    let mut sample = Vec::new();
    for r in [0.25, 0.5, 0.75] {
        for k in 0..8 {
            let z = C64::from_polar(r, PI * k as f64 / 4.0);
            if domain.contains(z) {
                if let Ok(w) = g.eval(z) {
                    sample.push(sphere_point(w));
                }
            }
        }
    }
    Ok(StabilityReport {
        spherical_area: est.area,
        area_error: est.error,
        stable_by_area_criterion: stable,
        verdict: if stable {
            Verdict::Stable
        } else {
            Verdict::NotConcluded
        },
        gauss_image_sample: sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational;
    use crate::geometry::Hole;

    /// Boundary form of the area: `2 Im ∮_∂M ḡ g′ dz / (1 + |g|²)`, valid
    /// when `g` has no poles in the domain.
    fn boundary_area(g: &RationalMap, domain: &CircularDomain) -> f64 {
        let (outer, holes) = domain.boundary_circles();
        let ring = |lp: &crate::geometry::HomologyLoop| {
            let n = 4096;
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                let t = k as f64 / n as f64;
                let z = lp.point(t);
                let (w, dw) = g.eval_with_derivative(z).unwrap();
                acc += w.conj() * dw * lp.tangent(t) / (1.0 + w.norm_sqr());
            }
            2.0 * (acc / n as f64).im
        };
        ring(&outer) - holes.iter().map(ring).sum::<f64>()
    }

    #[test]
    fn unit_disk_closed_forms() {
        let d = CircularDomain::disk();
        assert!((spherical_area(&RationalMap::z(), &d, 8).unwrap() - TAU).abs() < 1e-6);
        for eps in [0.1, 1.0 / 3f64.sqrt()] {
            let g = RationalMap::z().scale(C64::new(eps, 0.0));
            let want = 4.0 * PI * eps * eps / (1.0 + eps * eps);
            assert!((spherical_area(&g, &d, 8).unwrap() - want).abs() < 1e-6);
        }
        assert_eq!(
            spherical_area(&RationalMap::constant(C64::new(2.0, 1.0)), &d, 8).unwrap(),
            0.0
        );
    }

    #[test]
    fn agrees_with_boundary_formula_on_holed_domain() {
        let d = CircularDomain::new(vec![
            Hole::new(C64::new(0.3, 0.1), 0.2),
            Hole::new(C64::new(-0.4, -0.3), 0.15),
        ])
        .unwrap();
        let g = parse_rational("(z^2 + 0.5) / (z - 2)").unwrap();
        let a = spherical_area(&g, &d, 8).unwrap();
        let b = boundary_area(&g, &d);
        assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn pole_inside_hole_is_harmless() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let g = parse_rational("1/z").unwrap();
        // g maps the annulus onto 1 < |w| < 1/0.3, area 4π(1/(1+1) − 1/(1+0.3^-2))
        let want = 4.0 * PI * (1.0 / (1.0 + 0.09) - 0.5);
        assert!((spherical_area(&g, &d, 8).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn stability_verdicts() {
        let d = CircularDomain::disk();
        let small = stability_check(&RationalMap::z().scale(C64::new(0.1, 0.0)), &d, 8).unwrap();
        assert_eq!(small.verdict, Verdict::Stable);
        let edge = stability_check(&RationalMap::z(), &d, 8).unwrap();
        assert_eq!(edge.verdict, Verdict::NotConcluded);
        let flat = stability_check(&RationalMap::one(), &d, 8).unwrap();
        assert!(flat.stable_by_area_criterion && flat.spherical_area == 0.0);
    }
}
