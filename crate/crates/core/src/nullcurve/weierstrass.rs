use serde::{Deserialize, Serialize};

use super::{NullData, NullError};
use crate::geometry::CircularDomain;
use crate::holomorphic::RationalMap;
use crate::C64;

/// Complex Gauss map `g` and the coefficient `phi3` of `φ₃ = phi3 dz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassPair {
    pub g: RationalMap,
    pub phi3: RationalMap,
}

impl WeierstrassPair {
    pub fn new(g: RationalMap, phi3: RationalMap) -> Self {
        Self { g, phi3 }
    }

    /// Points of the closed domain where `φ₃` must have a specific order,
    /// with the order `φ₃` needs there.
    fn required_orders(&self, domain: &CircularDomain) -> Vec<(C64, i64)> {
        let mut pts: Vec<C64> = Vec::new();
        for (p, _) in self
            .g
            .zeros()
            .into_iter()
            .chain(self.g.poles())
            .chain(self.phi3.zeros())
            .chain(self.phi3.poles())
        {
            if domain.contains_closed(p, 1e-12)
                && !pts
                    .iter()
                    .any(|q| (q - p).norm() < 1e-6 * p.norm().max(1.0))
            {
                pts.push(p);
            }
        }
        pts.into_iter()
            .map(|p| (p, self.g.order_at(p).abs()))
            .collect()
    }
}

/// `f = (½(1/g − g), (i/2)(1/g + g), 1) · phi3`.
///
/// `φ₃` must vanish exactly to order `|ord g|` at every zero and pole of `g`
/// in the closed domain and nowhere else, so that `f` is holomorphic and
/// nowhere zero.
pub fn lift_weierstrass(
    pair: &WeierstrassPair,
    domain: &CircularDomain,
) -> Result<NullData, NullError> {
    if pair.g.is_zero() {
        return Err(NullError::InvalidPair("g is identically zero".into()));
    }
    if pair.phi3.is_zero() {
        return Err(NullError::InvalidPair("phi3 is identically zero".into()));
    }
    for (p, required) in pair.required_orders(domain) {
        let found = pair.phi3.order_at(p);
        if found != required {
            return Err(NullError::ZeroPoleMismatch {
                point: p,
                required,
                found,
            });
        }
    }
    let half = C64::new(0.5, 0.0);
    let over_g = pair.phi3.div(&pair.g)?;
    let times_g = pair.phi3.mul(&pair.g);
    let f1 = over_g.sub(&times_g).scale(half);
    let f2 = over_g.add(&times_g).scale(C64::new(0.0, 0.5));
    NullData::new(vec![f1, f2, pair.phi3.clone()], domain.clone())
}

/// The complex Gauss map of three-dimensional null data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ComplexGaussMap {
    Map(RationalMap),
    /// `f₁ − i f₂ ≡ 0`: the normal is constantly the north pole.
    Infinity,
}

/// Ratios `f_k / f_pivot`, the generalized Gauss map in an affine chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveGaussMap {
    pub pivot: usize,
    pub ratios: Vec<RationalMap>,
}

impl ProjectiveGaussMap {
    pub fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        self.pivot == o.pivot
            && self.ratios.len() == o.ratios.len()
            && self
                .ratios
                .iter()
                .zip(&o.ratios)
                .all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// Generalized Gauss map, plus `g = f₃ / (f₁ − i f₂)` when `n = 3`.
pub fn gauss_map_from_null(
    f: &NullData,
) -> Result<(ProjectiveGaussMap, Option<ComplexGaussMap>), NullError> {
    let comps = f.components();
    let pivot = comps
        .iter()
        .position(|c| !c.is_zero())
        .ok_or(NullError::CommonZero {
            point: C64::new(0.0, 0.0),
        })?;
    let ratios = comps
        .iter()
        .map(|c| c.div(&comps[pivot]))
        .collect::<Result<Vec<_>, _>>()?;
    let complex = if comps.len() == 3 {
        let den = comps[0].sub(&comps[1].scale(C64::new(0.0, 1.0)));
        Some(if den.is_zero() {
            ComplexGaussMap::Infinity
        } else {
            ComplexGaussMap::Map(comps[2].div(&den)?)
        })
    } else {
        None
    };
    Ok((ProjectiveGaussMap { pivot, ratios }, complex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational;
    use crate::nullcurve::NullField;

    fn ann() -> CircularDomain {
        CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap()
    }

    #[test]
    fn catenoid_lift_matches_expansion() {
        let pair = WeierstrassPair::new(RationalMap::z(), parse_rational("1/z").unwrap());
        let f = lift_weierstrass(&pair, &ann()).unwrap();
        let want = [
            parse_rational("(z^-2 - 1)/2").unwrap(),
            parse_rational("i(z^-2 + 1)/2").unwrap(),
            parse_rational("1/z").unwrap(),
        ];
        for (a, b) in f.components().iter().zip(&want) {
            assert!(a.approx_eq(b, 1e-15), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn constant_gauss_map_lift() {
        let pair = WeierstrassPair::new(RationalMap::one(), RationalMap::one());
        let f = lift_weierstrass(&pair, &CircularDomain::disk()).unwrap();
        let v = f.eval(C64::new(0.2, 0.1)).unwrap();
        assert_eq!(
            v,
            vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)]
        );
    }

    #[test]
    fn uncompensated_pole_is_rejected() {
        let pair = WeierstrassPair::new(RationalMap::z(), RationalMap::one());
        match lift_weierstrass(&pair, &CircularDomain::disk()) {
            Err(NullError::ZeroPoleMismatch {
                point,
                required,
                found,
            }) => {
                assert!(point.norm() < 1e-12);
                assert_eq!((required, found), (1, 0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gauss_map_examples() {
        let pair = WeierstrassPair::new(RationalMap::z(), parse_rational("1/z").unwrap());
        let f = lift_weierstrass(&pair, &ann()).unwrap();
        let (proj, g) = gauss_map_from_null(&f).unwrap();
        assert_eq!(g, Some(ComplexGaussMap::Map(RationalMap::z())));
        let h = parse_rational("(z - 2)/(z + 3)").unwrap();
        let (proj_h, _) = gauss_map_from_null(&f.scaled(&h)).unwrap();
        assert!(proj.approx_eq(&proj_h, 1e-12));

        let flat = NullData::new(
            vec![
                RationalMap::zero(),
                RationalMap::constant(C64::new(0.0, 1.0)),
                RationalMap::one(),
            ],
            ann(),
        )
        .unwrap();
        let (_, g) = gauss_map_from_null(&flat).unwrap();
        assert_eq!(g, Some(ComplexGaussMap::Map(RationalMap::one())));
    }
}
