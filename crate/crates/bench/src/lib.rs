//! Fixtures shared by the benchmarks.

use gaussflux::expr::parse_rational;
use gaussflux::nullcurve::lift_weierstrass;
use gaussflux::{CircularDomain, Hole, NullData, RationalMap, WeierstrassPair, C64};

pub fn annulus() -> CircularDomain {
    CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).expect("valid annulus")
}

pub fn two_holes() -> CircularDomain {
    CircularDomain::new(vec![
        Hole::new(C64::new(0.4, 0.1), 0.15),
        Hole::new(C64::new(-0.35, -0.2), 0.2),
    ])
    .expect("valid domain")
}

/// `g = z`, `φ₃ = dz / z` on the annulus.
pub fn catenoid() -> NullData {
    let pair = WeierstrassPair::new(RationalMap::z(), parse_rational("1/z").expect("parses"));
    lift_weierstrass(&pair, &annulus()).expect("catenoid lifts")
}

/// `g = (z - a) / (z - b)`, `φ₃ = dz` with `a`, `b` the hole centers.
pub fn planar_ends() -> NullData {
    let g = parse_rational("(z - 0.4 - 0.1i) / (z + 0.35 + 0.2i)").expect("parses");
    let pair = WeierstrassPair::new(g, RationalMap::one());
    lift_weierstrass(&pair, &two_holes()).expect("pair lifts")
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussflux::NullField;

    #[test]
    fn fixtures_build() {
        assert_eq!(catenoid().dim(), 3);
        assert_eq!(planar_ends().domain().homology_rank(), 2);
    }
}
