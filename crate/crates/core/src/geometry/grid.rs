use serde::{Deserialize, Serialize};

use super::{CircularDomain, GeometryError};
use crate::C64;

/// Layout of the logical `(u, v)` lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridChart {
    /// Square lattice over `[-1, 1]^2`, masked to the domain minus the collar.
    Cartesian,
    /// Radial lines from one hole to the outer circle; `v` (angle) is periodic.
    Annular { center: C64, inner: f64 },
}

/// Structured sample lattice over a circular domain minus a boundary collar.
///
/// Nodes are stored in grid-major order (`u` slow, `v` fast) and only nodes
/// at distance at least `boundary_offset` from every boundary circle are kept.
#[derive(Debug, Clone)]
pub struct DomainGrid {
    chart: GridChart,
    nu: usize,
    nv: usize,
    resolution: usize,
    boundary_offset: f64,
    /// logical `(i, j)` -> compact node index
    slots: Vec<Option<usize>>,
    nodes: Vec<C64>,
    logical: Vec<(usize, usize)>,
}

impl DomainGrid {
    /// Builds the grid. A single-hole domain gets an annular lattice with
    /// `resolution` radial and `4 * resolution` angular nodes; other domains
    /// get a masked square lattice with `2 * resolution` nodes per side.
    pub fn build(
        domain: &CircularDomain,
        resolution: usize,
        boundary_offset: f64,
    ) -> Result<Self, GeometryError> {
        if resolution < 4 {
            return Err(GeometryError::InvalidResolution(resolution));
        }
        let gap = domain.min_boundary_gap();
        if !(boundary_offset > 0.0) || !(2.0 * boundary_offset < gap) {
            return Err(GeometryError::OffsetTooLarge {
                offset: boundary_offset,
                gap,
            });
        }
        match domain.holes() {
            [hole] => Ok(Self::annular(
                domain,
                hole.center,
                hole.radius,
                resolution,
                boundary_offset,
            )),
            _ => Ok(Self::cartesian(domain, resolution, boundary_offset)),
        }
    }

    fn annular(
        domain: &CircularDomain,
        center: C64,
        radius: f64,
        resolution: usize,
        eps: f64,
    ) -> Self {
        let nu = resolution;
        let nv = 4 * resolution;
        let inner = radius + eps;
        let mut nodes = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            let s = i as f64 / (nu - 1) as f64;
            for j in 0..nv {
                let dir = C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / nv as f64);
                let outer = ray_to_circle(center, dir, CircularDomain::OUTER_RADIUS - eps);
                // geometric spacing in the radial direction
                let r = inner * (outer / inner).powf(s);
                nodes.push(center + dir * r);
            }
        }
        debug_assert!(nodes
            .iter()
            .all(|z| domain.boundary_distance(*z) >= eps * (1.0 - 1e-9)));
        let slots = (0..nu * nv).map(Some).collect();
        let logical = (0..nu * nv).map(|k| (k / nv, k % nv)).collect();
        Self {
            chart: GridChart::Annular { center, inner },
            nu,
            nv,
            resolution,
            boundary_offset: eps,
            slots,
            nodes,
            logical,
        }
    }

    fn cartesian(domain: &CircularDomain, resolution: usize, eps: f64) -> Self {
        let m = 2 * resolution;
        let h = 2.0 / (m - 1) as f64;
        let mut slots = vec![None; m * m];
        let mut nodes = Vec::new();
        let mut logical = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let z = C64::new(-1.0 + h * i as f64, -1.0 + h * j as f64);
                if domain.boundary_distance(z) >= eps {
                    slots[i * m + j] = Some(nodes.len());
                    nodes.push(z);
                    logical.push((i, j));
                }
            }
        }
        Self {
            chart: GridChart::Cartesian,
            nu: m,
            nv: m,
            resolution,
            boundary_offset: eps,
            slots,
            nodes,
            logical,
        }
    }

    pub fn chart(&self) -> GridChart {
        self.chart
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn boundary_offset(&self) -> f64 {
        self.boundary_offset
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nu, self.nv)
    }

    pub fn periodic_v(&self) -> bool {
        matches!(self.chart, GridChart::Annular { .. })
    }

    /// Sample points in grid-major order.
    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn logical(&self, node: usize) -> (usize, usize) {
        self.logical[node]
    }

    /// Node at logical position `(i, j)`, wrapping `j` on periodic lattices.
    pub fn at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || i >= self.nu as isize {
            return None;
        }
        let j = if self.periodic_v() {
            j.rem_euclid(self.nv as isize)
        } else if j < 0 || j >= self.nv as isize {
            return None;
        } else {
            j
        };
        self.slots[i as usize * self.nv + j as usize]
    }

    /// Neighbor `k` steps away along `axis` (0 = u, 1 = v).
    pub fn step(&self, node: usize, axis: usize, k: isize) -> Option<usize> {
        let (i, j) = self.logical[node];
        let (i, j) = (i as isize, j as isize);
        if axis == 0 {
            self.at(i + k, j)
        } else {
            self.at(i, j + k)
        }
    }

    /// Whether all neighbors within `half_width` steps exist along both axes.
    pub fn has_full_stencil(&self, node: usize, half_width: usize) -> bool {
        let hw = half_width as isize;
        (1..=hw).all(|k| {
            self.step(node, 0, k).is_some()
                && self.step(node, 0, -k).is_some()
                && self.step(node, 1, k).is_some()
                && self.step(node, 1, -k).is_some()
        })
    }

    /// Quadrilateral faces `[a, b, c, d]` (counterclockwise in the lattice).
    pub fn faces(&self) -> Vec<[usize; 4]> {
        let mut faces = Vec::new();
        let jmax = if self.periodic_v() {
            self.nv
        } else {
            self.nv - 1
        };
        for i in 0..self.nu - 1 {
            for j in 0..jmax {
                let (i, j) = (i as isize, j as isize);
                if let (Some(a), Some(b), Some(c), Some(d)) = (
                    self.at(i, j),
                    self.at(i + 1, j),
                    self.at(i + 1, j + 1),
                    self.at(i, j + 1),
                ) {
                    faces.push([a, b, c, d]);
                }
            }
        }
        faces
    }

    /// Lattice edges between neighboring nodes whose straight segment stays in the domain.
    pub fn edges(&self, domain: &CircularDomain) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for node in 0..self.len() {
            for axis in 0..2 {
                if let Some(next) = self.step(node, axis, 1) {
                    if next != node && domain.segment_inside(self.nodes[node], self.nodes[next]) {
                        edges.push((node, next));
                    }
                }
            }
        }
        edges
    }

    /// Index of the node nearest to `z`.
    pub fn nearest(&self, z: C64) -> Option<usize> {
        self.nodes
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
            .map(|(k, _)| k)
    }
}

/// Distance `t > 0` with `|c + t d| = radius`, for `|c| < radius` and `|d| = 1`.
fn ray_to_circle(c: C64, d: C64, radius: f64) -> f64 {
    let b = (c.conj() * d).re;
    -b + (b * b - c.norm_sqr() + radius * radius).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Hole;

    #[test]
    fn annulus_grid_avoids_hole() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let g = DomainGrid::build(&d, 8, 0.01).unwrap();
        assert!(matches!(g.chart(), GridChart::Annular { .. }));
        assert_eq!(g.nodes().iter().filter(|z| z.norm() <= 0.3).count(), 0);
        assert_eq!(g.len(), 8 * 32);
        assert_eq!(g.faces().len(), 7 * 32);
    }

    #[test]
    fn disk_grid_is_dense_enough() {
        let g = DomainGrid::build(&CircularDomain::disk(), 16, 0.01).unwrap();
        assert!(g.len() >= 256);
    }

    #[test]
    fn two_hole_grid_respects_collar() {
        let d = CircularDomain::new(vec![
            Hole::new(C64::new(-0.5, 0.0), 0.1),
            Hole::new(C64::new(0.5, 0.0), 0.1),
        ])
        .unwrap();
        let eps = 0.02;
        let g = DomainGrid::build(&d, 12, eps).unwrap();
        assert!(!g.is_empty());
        for z in g.nodes() {
            assert!(1.0 - z.norm() >= eps);
            for h in d.holes() {
                assert!((z - h.center).norm() - h.radius >= eps);
            }
        }
    }

    #[test]
    fn offset_and_resolution_are_checked() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        assert!(matches!(
            DomainGrid::build(&d, 8, 0.5),
            Err(GeometryError::OffsetTooLarge { .. })
        ));
        assert!(matches!(
            DomainGrid::build(&d, 3, 0.01),
            Err(GeometryError::InvalidResolution(3))
        ));
    }

    #[test]
    fn off_center_annulus_nodes_stay_inside() {
        let d = CircularDomain::annulus(C64::new(0.2, -0.1), 0.25).unwrap();
        let g = DomainGrid::build(&d, 10, 0.03).unwrap();
        for z in g.nodes() {
            assert!(d.boundary_distance(*z) >= 0.03 - 1e-12);
        }
        // every lattice edge is a short chord inside the domain
        assert_eq!(g.edges(&d).len(), 10 * 40 + 9 * 40);
    }
}
