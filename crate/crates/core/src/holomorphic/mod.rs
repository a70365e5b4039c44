//! Polynomials, rational maps, multipliers and argument-principle checks.

mod multiplier;
mod poly;
mod rational;
mod roots;

pub use multiplier::{ExpMultiplier, LaurentExpansion, PrincipalPart, SprayMultiplier};
pub use poly::{poly_sum, Polynomial};
pub use rational::{RationalMap, CANCEL_TOL};
pub use roots::aberth;

use crate::geometry::{
    contour_integral_vec, CircularDomain, DomainGrid, GeometryError, HomologyLoop, QuadratureSpec,
};
use crate::C64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum HoloError {
    #[error("evaluation too close to a pole at {z}")]
    NearPole { z: C64 },
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("function vanishes on the contour near {z}")]
    ZeroOnContour { z: C64 },
    #[error("winding integral {value} is not close to an integer")]
    AmbiguousWinding { value: C64 },
    #[error("spray factor vanishes at {z}")]
    SprayVanishes { z: C64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A function holomorphic near the points where it is evaluated.
pub trait Holomorphic: Sync {
    fn eval(&self, z: C64) -> Result<C64, HoloError>;

    fn eval_with_derivative(&self, z: C64) -> Result<(C64, C64), HoloError>;

    /// `F'(z) / F(z)`.
    fn log_derivative(&self, z: C64) -> Result<C64, HoloError> {
        let (v, d) = self.eval_with_derivative(z)?;
        if v == C64::new(0.0, 0.0) {
            return Err(HoloError::ZeroOnContour { z });
        }
        Ok(d / v)
    }
}

/// A holomorphic function given by a closure returning `(F(z), F'(z))`.
pub struct AnalyticFn<F>(pub F);

impl<F> Holomorphic for AnalyticFn<F>
where
    F: Fn(C64) -> (C64, C64) + Sync,
{
    fn eval(&self, z: C64) -> Result<C64, HoloError> {
        Ok((self.0)(z).0)
    }

    fn eval_with_derivative(&self, z: C64) -> Result<(C64, C64), HoloError> {
        Ok((self.0)(z))
    }
}

impl<T: Holomorphic + ?Sized> Holomorphic for &T {
    fn eval(&self, z: C64) -> Result<C64, HoloError> {
        (**self).eval(z)
    }

    fn eval_with_derivative(&self, z: C64) -> Result<(C64, C64), HoloError> {
        (**self).eval_with_derivative(z)
    }

    fn log_derivative(&self, z: C64) -> Result<C64, HoloError> {
        (**self).log_derivative(z)
    }
}

/// Winding number of `F` along the loop, `(1/2πi) ∮ F'/F dz` rounded.
pub fn winding_number(
    f: &dyn Holomorphic,
    lp: &HomologyLoop,
    quad: &QuadratureSpec,
) -> Result<i64, HoloError> {
    let r = contour_integral_vec::<HoloError, _>(
        1,
        |z, out| {
            let l = f.log_derivative(z)?;
            // a zero within about 1e-8 of the circle
            if !(l.norm() * lp.radius < 1e8) {
                return Err(HoloError::ZeroOnContour { z });
            }
            out[0] = l;
            Ok(())
        },
        lp,
        quad,
    )?;
    let w = r.value[0] / C64::new(0.0, std::f64::consts::TAU);
    let k = w.re.round();
    if (w - k).norm() > 0.1 {
        return Err(HoloError::AmbiguousWinding { value: w });
    }
    Ok(k as i64)
}

/// Whether `F` has no zero in the domain: the argument-principle count over
/// the boundary is zero and `|F| > 1e-10` at every grid node.
pub fn assert_nonvanishing(
    f: &dyn Holomorphic,
    domain: &CircularDomain,
    grid: &DomainGrid,
    quad: &QuadratureSpec,
) -> Result<bool, HoloError> {
    let (outer, holes) = domain.boundary_circles();
    let mut count = winding_number(f, &outer, quad)?;
    for h in &holes {
        count -= winding_number(f, h, quad)?;
    }
    if count != 0 {
        return Ok(false);
    }
    for z in grid.nodes() {
        if !(f.eval(*z)?.norm() > 1e-10) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn winding_examples() {
        let q = QuadratureSpec::default();
        let unit = HomologyLoop::new(c(0.0, 0.0), 1.0);
        assert_eq!(winding_number(&RationalMap::z(), &unit, &q).unwrap(), 1);
        let e = AnalyticFn(|z: C64| (z.exp(), z.exp()));
        assert_eq!(winding_number(&e, &unit, &q).unwrap(), 0);
        let p = RationalMap::from_polynomial(Polynomial::from_roots(&[
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(3.0, 0.0),
        ]));
        assert_eq!(winding_number(&p, &unit, &q).unwrap(), 2);
    }

    #[test]
    fn zero_on_contour_is_reported() {
        let q = QuadratureSpec::default();
        let unit = HomologyLoop::new(c(0.0, 0.0), 1.0);
        let p = RationalMap::from_polynomial(Polynomial::linear_root(c(1.0, 0.0)));
        assert!(matches!(
            winding_number(&p, &unit, &q),
            Err(HoloError::ZeroOnContour { .. })
        ));
    }

    #[test]
    fn nonvanishing_examples() {
        let q = QuadratureSpec::default();
        let ann = CircularDomain::annulus(c(0.0, 0.0), 0.3).unwrap();
        let ga = DomainGrid::build(&ann, 8, 0.01).unwrap();
        let e = AnalyticFn(|z: C64| (z.exp(), z.exp()));
        assert!(assert_nonvanishing(&e, &ann, &ga, &q).unwrap());
        assert!(assert_nonvanishing(&RationalMap::z(), &ann, &ga, &q).unwrap());
        let disk = CircularDomain::disk();
        let gd = DomainGrid::build(&disk, 8, 0.01).unwrap();
        let p = RationalMap::from_polynomial(Polynomial::linear_root(c(0.5, 0.0)));
        assert!(!assert_nonvanishing(&p, &disk, &gd, &q).unwrap());
    }
}
