//! Null data, the Weierstrass lift, Gauss maps and the ℤ₂ component class.

mod spinor;
mod weierstrass;

pub use spinor::{
    component_class, flat_class_representative, spinor_lift, z2_invariant, FlatRepresentative,
    SpinorLift,
};
pub use weierstrass::{
    gauss_map_from_null, lift_weierstrass, ComplexGaussMap, ProjectiveGaussMap, WeierstrassPair,
};

use serde::{Deserialize, Serialize};

use crate::geometry::{CircularDomain, DomainGrid, GeometryError};
use crate::holomorphic::{poly_sum, HoloError, Holomorphic, Polynomial, RationalMap};
use crate::linalg;
use crate::C64;

/// Relative threshold for the numerical rank of sampled values.
pub const RANK_TOL: f64 = 1e-8;
/// Relative size of the cleared-denominator residual accepted as an exact identity.
pub const NULLITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, thiserror::Error)]
pub enum NullError {
    #[error("null data needs dimension at least 3, got {0}")]
    Dimension(usize),
    #[error("sum of squares does not vanish (relative residual {residual:.3e})")]
    NullityViolated { residual: f64 },
    #[error("component {component} has a pole at {point} in the closed domain")]
    PoleInDomain { component: usize, point: C64 },
    #[error("all components vanish at {point}")]
    CommonZero { point: C64 },
    #[error("Weierstrass pair: at {point} phi3 has order {found}, needs {required}")]
    ZeroPoleMismatch {
        point: C64,
        required: i64,
        found: i64,
    },
    #[error("invalid Weierstrass pair: {0}")]
    InvalidPair(String),
    #[error("spinor lift did not resolve with {samples} samples")]
    LiftAmbiguous { samples: usize },
    #[error("class vector has length {found}, domain has {expected} holes")]
    ClassLength { expected: usize, found: usize },
    #[error("class representative has class {found:?}, wanted {wanted:?}")]
    ClassMismatch { wanted: Vec<u8>, found: Vec<u8> },
    #[error("multiplier solve failed: {0}")]
    SolverFailed(String),
    #[error(transparent)]
    Holo(#[from] HoloError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A holomorphic map from a circular domain into the null quadric.
pub trait NullField: Sync {
    fn dim(&self) -> usize;

    fn domain(&self) -> &CircularDomain;

    /// Writes `f(z)` into `out` (length [`NullField::dim`]).
    fn eval_into(&self, z: C64, out: &mut [C64]) -> Result<(), HoloError>;

    fn eval(&self, z: C64) -> Result<Vec<C64>, HoloError> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        self.eval_into(z, &mut v)?;
        Ok(v)
    }
}

/// Rational null data `f = (f_1, ..., f_n)` on a circular domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullData {
    components: Vec<RationalMap>,
    domain: CircularDomain,
}

impl NullData {
    /// Wraps the components; only the dimension is checked here, see [`validate_null`].
    pub fn new(components: Vec<RationalMap>, domain: CircularDomain) -> Result<Self, NullError> {
        if components.len() < 3 {
            return Err(NullError::Dimension(components.len()));
        }
        Ok(Self { components, domain })
    }

    pub fn components(&self) -> &[RationalMap] {
        &self.components
    }

    /// Componentwise product with a rational function.
    pub fn scaled(&self, r: &RationalMap) -> Self {
        Self {
            components: self.components.iter().map(|c| c.mul(r)).collect(),
            domain: self.domain.clone(),
        }
    }

    /// Same components on another domain.
    pub fn on_domain(&self, domain: CircularDomain) -> Self {
        Self {
            components: self.components.clone(),
            domain,
        }
    }

    /// Relative size of `Σ f_j²` after clearing denominators.
    pub fn nullity_residual(&self) -> f64 {
        let n = self.components.len();
        let terms: Vec<Polynomial> = (0..n)
            .map(|j| {
                let mut t = &self.components[j].num().clone() * self.components[j].num();
                for (k, c) in self.components.iter().enumerate() {
                    if k != j {
                        t = &t * &(c.den() * c.den());
                    }
                }
                t
            })
            .collect();
        let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.max_abs()));
        if scale == 0.0 {
            return 0.0;
        }
        poly_sum(&terms).max_abs() / scale
    }
}

impl NullField for NullData {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn domain(&self) -> &CircularDomain {
        &self.domain
    }

    fn eval_into(&self, z: C64, out: &mut [C64]) -> Result<(), HoloError> {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(z)?;
        }
        Ok(())
    }
}

/// `h · f` for a holomorphic multiplier `h`.
pub struct Scaled<'a> {
    pub f: &'a dyn NullField,
    pub h: &'a dyn Holomorphic,
}

impl NullField for Scaled<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn domain(&self) -> &CircularDomain {
        self.f.domain()
    }

    fn eval_into(&self, z: C64, out: &mut [C64]) -> Result<(), HoloError> {
        self.f.eval_into(z, out)?;
        let h = self.h.eval(z)?;
        out.iter_mut().for_each(|v| *v *= h);
        Ok(())
    }
}

/// Outcome of [`validate_null`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullReport {
    pub dim: usize,
    pub nullity_residual: f64,
    /// Numerical rank of the sampled values.
    pub rank: usize,
    pub full: bool,
    pub singular_values: Vec<f64>,
}

/// Checks nullity (as a polynomial identity), pole placement and common
/// zeros, then measures the span of the values on the grid.
pub fn validate_null(f: &NullData, grid: &DomainGrid) -> Result<NullReport, NullError> {
    let residual = f.nullity_residual();
    if !(residual < NULLITY_TOL) {
        return Err(NullError::NullityViolated { residual });
    }
    let domain = f.domain();
    for (j, c) in f.components().iter().enumerate() {
        for (p, _) in c.poles() {
            if domain.contains_closed(p, 1e-12) {
                return Err(NullError::PoleInDomain {
                    component: j,
                    point: p,
                });
            }
        }
    }
    let nonzero: Vec<&RationalMap> = f.components().iter().filter(|c| !c.is_zero()).collect();
    let Some(first) = nonzero.first() else {
        return Err(NullError::CommonZero {
            point: C64::new(0.0, 0.0),
        });
    };
    for (p, _) in first.zeros() {
        if domain.contains_closed(p, 1e-12) && nonzero.iter().all(|c| c.order_at(p) > 0) {
            return Err(NullError::CommonZero { point: p });
        }
    }
    let (rank, singular_values) = sampled_rank(f, grid)?;
    Ok(NullReport {
        dim: f.dim(),
        nullity_residual: residual,
        rank,
        full: rank == f.dim(),
        singular_values,
    })
}

/// Numerical rank of `{f(z) : z in grid}` with unit-normalized samples.
pub fn sampled_rank(f: &dyn NullField, grid: &DomainGrid) -> Result<(usize, Vec<f64>), HoloError> {
    rank_at(f, grid.nodes())
}

/// Numerical rank of `{f(z) : z in points}` with unit-normalized samples.
pub fn rank_at(f: &dyn NullField, points: &[C64]) -> Result<(usize, Vec<f64>), HoloError> {
    let n = f.dim();
    let mut cols = Vec::with_capacity(points.len());
    for z in points {
        let v = f.eval(*z)?;
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            cols.push(v.iter().map(|x| x / norm).collect::<Vec<_>>());
        }
    }
    if cols.is_empty() {
        return Ok((0, Vec::new()));
    }
    let m = nalgebra::DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let s = linalg::singular_values(&m);
    let top = s.first().copied().unwrap_or(0.0);
    let rank = s
        .iter()
        .filter(|x| top > 0.0 && **x > RANK_TOL * top)
        .count();
    Ok((rank, s))
}

/// Sampled nullity and nonvanishing check for transcendental null fields:
/// returns `max |Σ f_j²| / Σ |f_j|²` over the grid.
pub fn sampled_nullity(f: &dyn NullField, grid: &DomainGrid) -> Result<f64, NullError> {
    let mut worst = 0.0f64;
    for z in grid.nodes() {
        let v = f.eval(*z)?;
        let s: C64 = v.iter().map(|x| x * x).sum();
        let m: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if m == 0.0 {
            return Err(NullError::CommonZero { point: *z });
        }
        worst = worst.max(s.norm() / m);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational;

    pub(crate) fn catenoid() -> NullData {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        NullData::new(
            vec![
                parse_rational("(z^-2 - 1)/2").unwrap(),
                parse_rational("i(z^-2 + 1)/2").unwrap(),
                parse_rational("1/z").unwrap(),
            ],
            d,
        )
        .unwrap()
    }

    #[test]
    fn catenoid_is_valid_and_full() {
        let f = catenoid();
        let g = DomainGrid::build(f.domain(), 8, 0.01).unwrap();
        let r = validate_null(&f, &g).unwrap();
        assert_eq!(r.rank, 3);
        assert!(r.full);
        assert_eq!(r.nullity_residual, 0.0);
    }

    #[test]
    fn degenerate_direction_has_rank_one() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let z = RationalMap::z();
        let f = NullData::new(
            vec![z.clone(), z.scale(C64::new(0.0, 1.0)), RationalMap::zero()],
            d,
        )
        .unwrap();
        let g = DomainGrid::build(f.domain(), 8, 0.01).unwrap();
        let r = validate_null(&f, &g).unwrap();
        assert_eq!(r.rank, 1);
        assert!(!r.full);
    }

    #[test]
    fn violations_are_detected() {
        let disk = CircularDomain::disk();
        let z = RationalMap::z();
        let g = DomainGrid::build(&disk, 8, 0.01).unwrap();
        let f = NullData::new(vec![z.clone(), z.clone(), z.clone()], disk.clone()).unwrap();
        assert!(matches!(
            validate_null(&f, &g),
            Err(NullError::NullityViolated { .. })
        ));
        let f = NullData::new(
            vec![z.clone(), z.scale(C64::new(0.0, 1.0)), RationalMap::zero()],
            disk.clone(),
        )
        .unwrap();
        assert!(matches!(
            validate_null(&f, &g),
            Err(NullError::CommonZero { .. })
        ));
        let inv = parse_rational("1/(z-0.5)").unwrap();
        let f = NullData::new(
            vec![
                inv.clone(),
                inv.scale(C64::new(0.0, 1.0)),
                RationalMap::zero(),
            ],
            disk,
        )
        .unwrap();
        assert!(matches!(
            validate_null(&f, &g),
            Err(NullError::PoleInDomain { .. })
        ));
    }

    #[test]
    fn nullity_tolerates_rounding_in_coefficients() {
        let f = catenoid().scaled(&parse_rational("(0.1 + 0.3 i) z^3 - 0.7").unwrap());
        assert!(f.nullity_residual() < NULLITY_TOL);
    }
}
