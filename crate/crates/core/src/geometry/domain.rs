use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::C64;

/// A round hole `|z - center| <= radius` removed from the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: C64,
    pub radius: f64,
}

impl Hole {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center, radius }
    }
}

/// The unit disk minus finitely many pairwise disjoint closed round holes.
///
/// The first homology group is free of rank equal to the number of holes;
/// [`CircularDomain::loops`] returns one basis cycle per hole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularDomain {
    holes: Vec<Hole>,
}

/// A positively oriented circle `t -> center + radius * exp(2 pi i t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomologyLoop {
    pub center: C64,
    pub radius: f64,
}

impl HomologyLoop {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Point at parameter `t` in `[0, 1)`.
    pub fn point(&self, t: f64) -> C64 {
        self.center + self.radius * C64::from_polar(1.0, std::f64::consts::TAU * t)
    }

    /// `dz/dt` at parameter `t`.
    pub fn tangent(&self, t: f64) -> C64 {
        let e = C64::from_polar(1.0, std::f64::consts::TAU * t);
        C64::new(0.0, std::f64::consts::TAU) * self.radius * e
    }
}

impl CircularDomain {
    pub const OUTER_RADIUS: f64 = 1.0;

    /// The unit disk.
    pub fn disk() -> Self {
        Self { holes: Vec::new() }
    }

    /// The unit disk minus the given holes, validated.
    pub fn new(holes: Vec<Hole>) -> Result<Self, GeometryError> {
        for (i, h) in holes.iter().enumerate() {
            if !(h.radius > 0.0) || !h.radius.is_finite() {
                return Err(GeometryError::InvalidDomain(format!(
                    "hole {i} has non-positive radius {}",
                    h.radius
                )));
            }
            if !(h.center.norm() + h.radius < Self::OUTER_RADIUS) {
                return Err(GeometryError::InvalidDomain(format!(
                    "hole {i} is not strictly inside the unit disk"
                )));
            }
        }
        for i in 0..holes.len() {
            for j in i + 1..holes.len() {
                let d = (holes[i].center - holes[j].center).norm();
                if !(d > holes[i].radius + holes[j].radius) {
                    return Err(GeometryError::InvalidDomain(format!(
                        "holes {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(Self { holes })
    }

    /// Annulus-like domain with a single hole.
    pub fn annulus(center: C64, radius: f64) -> Result<Self, GeometryError> {
        Self::new(vec![Hole::new(center, radius)])
    }

    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    /// Rank of the first homology group.
    pub fn homology_rank(&self) -> usize {
        self.holes.len()
    }

    /// Distance from `z` to the nearest boundary circle; negative outside the domain.
    pub fn boundary_distance(&self, z: C64) -> f64 {
        let mut d = Self::OUTER_RADIUS - z.norm();
        for h in &self.holes {
            d = d.min((z - h.center).norm() - h.radius);
        }
        d
    }

    /// Whether `z` lies in the open domain.
    pub fn contains(&self, z: C64) -> bool {
        self.boundary_distance(z) > 0.0
    }

    /// Whether `z` lies in the closed domain (boundary circles included).
    pub fn contains_closed(&self, z: C64, tol: f64) -> bool {
        self.boundary_distance(z) >= -tol
    }

    /// Smallest distance between two distinct boundary circles.
    pub fn min_boundary_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for (i, h) in self.holes.iter().enumerate() {
            gap = gap.min(Self::OUTER_RADIUS - h.center.norm() - h.radius);
            for g in &self.holes[i + 1..] {
                gap = gap.min((h.center - g.center).norm() - h.radius - g.radius);
            }
        }
        if self.holes.is_empty() {
            2.0 * Self::OUTER_RADIUS
        } else {
            gap
        }
    }

    /// Distance from the center of hole `j` to the nearest *other* boundary circle.
    fn clearance(&self, j: usize) -> f64 {
        let c = self.holes[j].center;
        let mut d = Self::OUTER_RADIUS - c.norm();
        for (i, h) in self.holes.iter().enumerate() {
            if i != j {
                d = d.min((c - h.center).norm() - h.radius);
            }
        }
        d
    }

    /// One counterclockwise loop per hole, in hole order.
    ///
    /// The loop radius is the geometric mean of the hole radius and the
    /// distance from the hole center to the nearest other boundary circle,
    /// which places it strictly between the two and keeps distinct loops disjoint.
    pub fn loops(&self) -> Vec<HomologyLoop> {
        (0..self.holes.len())
            .map(|j| {
                let h = self.holes[j];
                HomologyLoop::new(h.center, (h.radius * self.clearance(j)).sqrt())
            })
            .collect()
    }

    /// Positively oriented outer boundary followed by the hole boundaries.
    pub fn boundary_circles(&self) -> (HomologyLoop, Vec<HomologyLoop>) {
        (
            HomologyLoop::new(C64::new(0.0, 0.0), Self::OUTER_RADIUS),
            self.holes
                .iter()
                .map(|h| HomologyLoop::new(h.center, h.radius))
                .collect(),
        )
    }

    /// Whether the straight segment `[a, b]` stays inside the open domain.
    pub fn segment_inside(&self, a: C64, b: C64) -> bool {
        if !(a.norm() < Self::OUTER_RADIUS && b.norm() < Self::OUTER_RADIUS) {
            return false;
        }
        self.holes
            .iter()
            .all(|h| segment_point_distance(a, b, h.center) > h.radius)
    }
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub(crate) fn segment_point_distance(a: C64, b: C64, p: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}
