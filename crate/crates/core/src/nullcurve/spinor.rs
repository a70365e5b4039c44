use serde::{Deserialize, Serialize};

use super::{NullData, NullError, NullField};
use crate::geometry::{CircularDomain, HomologyLoop, QuadratureSpec};
use crate::holomorphic::{ExpMultiplier, HoloError, Holomorphic, Polynomial, RationalMap};
use crate::periodsolver::{solve_multiplier, PeriodTarget, SolveOptions};
use crate::C64;

/// Largest accepted jump between consecutive spinor samples, relative to `|a| + |b|`.
const MAX_JUMP: f64 = 0.2;

/// Continuous choice of `(a, b)` with `f = (a² − b², i(a² + b²), 2ab)` along a loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinorLift {
    /// Samples at `t = k / (len - 1)`; the last sample lies over the first point.
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    /// Largest relative jump between neighbors.
    pub max_jump: f64,
    /// Largest `|ab − f₃/2|` over the samples.
    pub consistency: f64,
}

impl SpinorLift {
    /// 0 if the lift closes up, 1 if it ends at `(−a, −b)`.
    pub fn class(&self) -> u8 {
        let (a0, b0) = (self.a[0], self.b[0]);
        let (a1, b1) = (*self.a.last().unwrap(), *self.b.last().unwrap());
        let same = (a1 - a0).norm() + (b1 - b0).norm();
        let flip = (a1 + a0).norm() + (b1 + b0).norm();
        u8::from(flip < same)
    }
}

/// One of the two spinors over `v`.
fn spinor_at(v: &[C64]) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let a2 = (v[0] - i * v[1]) * 0.5;
    let b2 = -(v[0] + i * v[1]) * 0.5;
    let ab = v[2] * 0.5;
    if a2.norm() >= b2.norm() {
        let a = a2.sqrt();
        (a, ab / a)
    } else {
        let b = b2.sqrt();
        (ab / b, b)
    }
}

fn try_lift(
    f: &dyn NullField,
    lp: &HomologyLoop,
    n: usize,
) -> Result<Option<SpinorLift>, HoloError> {
    let mut a: Vec<C64> = Vec::with_capacity(n + 1);
    let mut b: Vec<C64> = Vec::with_capacity(n + 1);
    let mut buf = [C64::new(0.0, 0.0); 3];
    let mut max_jump = 0.0f64;
    let mut consistency = 0.0f64;
    for k in 0..=n {
        let z = lp.point(k as f64 / n as f64);
        f.eval_into(z, &mut buf)?;
        let (mut x, mut y) = spinor_at(&buf);
        consistency = consistency.max((x * y - buf[2] * 0.5).norm());
        if let (Some(&pa), Some(&pb)) = (a.last(), b.last()) {
            let keep = (x - pa).norm() + (y - pb).norm();
            let flip = (x + pa).norm() + (y + pb).norm();
            if flip < keep {
                x = -x;
                y = -y;
            }
            let jump = keep.min(flip) / (x.norm() + y.norm());
            max_jump = max_jump.max(jump);
            if jump >= MAX_JUMP {
                return Ok(None);
            }
        }
        a.push(x);
        b.push(y);
    }
    Ok(Some(SpinorLift {
        a,
        b,
        max_jump,
        consistency,
    }))
}

/// Tracks the spinor lift along the loop, doubling the sample count until
/// every jump is below 0.2 relative to `|a| + |b|`.
pub fn spinor_lift(
    f: &dyn NullField,
    lp: &HomologyLoop,
    quad: &QuadratureSpec,
) -> Result<SpinorLift, NullError> {
    if f.dim() != 3 {
        return Err(NullError::Dimension(f.dim()));
    }
    quad.validate()?;
    let mut n = quad.samples_per_loop;
    while n <= quad.max_samples() {
        if let Some(lift) = try_lift(f, lp, n)? {
            return Ok(lift);
        }
        n *= 2;
    }
    Err(NullError::LiftAmbiguous { samples: n / 2 })
}

/// The ℤ₂ class of `f` along one loop.
pub fn z2_invariant(
    f: &dyn NullField,
    lp: &HomologyLoop,
    quad: &QuadratureSpec,
) -> Result<u8, NullError> {
    Ok(spinor_lift(f, lp, quad)?.class())
}

/// [`z2_invariant`] for every homology loop, in hole order.
pub fn component_class(f: &dyn NullField, quad: &QuadratureSpec) -> Result<Vec<u8>, NullError> {
    f.domain()
        .loops()
        .iter()
        .map(|lp| z2_invariant(f, lp, quad))
        .collect()
}

/// Flat null data `(1, i, 0) · ∏(z − c_j) · h` in a prescribed class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatRepresentative {
    pub data: NullData,
    pub multiplier: ExpMultiplier,
}

impl NullField for FlatRepresentative {
    fn dim(&self) -> usize {
        3
    }

    fn domain(&self) -> &CircularDomain {
        self.data.domain()
    }

    fn eval_into(&self, z: C64, out: &mut [C64]) -> Result<(), HoloError> {
        self.data.eval_into(z, out)?;
        let h = self.multiplier.eval(z)?;
        out.iter_mut().for_each(|v| *v *= h);
        Ok(())
    }
}

/// Flat null data whose class is `target` and whose real periods vanish,
/// so that it integrates to a flat conformal minimal immersion.
pub fn flat_class_representative(
    domain: &CircularDomain,
    target: &[u8],
    options: &SolveOptions,
) -> Result<FlatRepresentative, NullError> {
    let l = domain.homology_rank();
    if target.len() != l {
        return Err(NullError::ClassLength {
            expected: l,
            found: target.len(),
        });
    }
    let roots: Vec<C64> = domain
        .holes()
        .iter()
        .zip(target)
        .filter(|(_, bit)| **bit & 1 == 1)
        .map(|(h, _)| h.center)
        .collect();
    let g = RationalMap::from_polynomial(Polynomial::from_roots(&roots));
    let data = NullData::new(
        vec![g.clone(), g.scale(C64::new(0.0, 1.0)), RationalMap::zero()],
        domain.clone(),
    )?;
    let report = solve_multiplier(&data, &PeriodTarget::real_zero(l, 3), options)
        .map_err(|e| NullError::SolverFailed(e.to_string()))?;
    let rep = FlatRepresentative {
        data,
        multiplier: report.multiplier,
    };
    let found = component_class(&rep, &options.quad)?;
    let wanted: Vec<u8> = target.iter().map(|b| b & 1).collect();
    if found != wanted {
        return Err(NullError::ClassMismatch { wanted, found });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nullcurve::{lift_weierstrass, WeierstrassPair};

    fn ann() -> CircularDomain {
        CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap()
    }

    fn flat(domain: CircularDomain, g: RationalMap) -> NullData {
        NullData::new(
            vec![g.clone(), g.scale(C64::new(0.0, 1.0)), RationalMap::zero()],
            domain,
        )
        .unwrap()
    }

    #[test]
    fn catenoid_class_is_zero() {
        let pair = WeierstrassPair::new(RationalMap::z(), RationalMap::z().powi(-1).unwrap());
        let f = lift_weierstrass(&pair, &ann()).unwrap();
        let q = QuadratureSpec::default();
        let lift = spinor_lift(&f, &f.domain().loops()[0], &q).unwrap();
        assert!(lift.consistency < 1e-14);
        assert_eq!(lift.class(), 0);
        assert_eq!(component_class(&f, &q).unwrap(), vec![0]);
    }

    #[test]
    fn odd_winding_flips_the_spinor() {
        let q = QuadratureSpec::default();
        assert_eq!(
            component_class(&flat(ann(), RationalMap::z()), &q).unwrap(),
            vec![1]
        );
        assert_eq!(
            component_class(&flat(ann(), RationalMap::one()), &q).unwrap(),
            vec![0]
        );
        let z2 = RationalMap::z().powi(2).unwrap();
        assert_eq!(component_class(&flat(ann(), z2), &q).unwrap(), vec![0]);
    }

    #[test]
    fn simply_connected_has_empty_class() {
        let f = flat(CircularDomain::disk(), RationalMap::one());
        assert!(component_class(&f, &QuadratureSpec::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let d = CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap();
        let one = RationalMap::one();
        let i = RationalMap::constant(C64::new(0.0, 1.0));
        let f = NullData::new(
            vec![one.clone(), i, one.clone(), one.scale(C64::new(0.0, 1.0))],
            d,
        )
        .unwrap();
        assert!(matches!(
            z2_invariant(&f, &f.domain().loops()[0], &QuadratureSpec::default()),
            Err(NullError::Dimension(4))
        ));
    }
}
