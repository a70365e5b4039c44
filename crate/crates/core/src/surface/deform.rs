use serde::{Deserialize, Serialize};

use super::{ImmersionField, SurfaceError};
use crate::geometry::{contour_integral_vec, CircularDomain, QuadratureSpec};
use crate::holomorphic::{ExpMultiplier, HoloError, Holomorphic, RationalMap};
use crate::nullcurve::{NullData, NullField, WeierstrassPair};
use crate::periodsolver::period_map;
use crate::C64;

/// Periods below this are treated as zero by the exactness checks.
pub const EXACT_TOL: f64 = 1e-8;

/// A 1-form that failed an exactness check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactnessFailure {
    pub form: String,
    pub loop_index: usize,
    pub period: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Associated,
    LopezRosFlat,
    Nonflatization,
    FluxIsotopy,
}

/// Sampled one-parameter family of immersions.
#[derive(Debug, Clone, Serialize)]
pub struct DeformationFamily {
    pub kind: FamilyKind,
    pub parameters: Vec<f64>,
    pub fields: Vec<ImmersionField>,
}

impl DeformationFamily {
    /// Largest pointwise change between consecutive samples.
    pub fn max_jump(&self) -> f64 {
        self.fields
            .windows(2)
            .map(|w| w[0].max_distance(&w[1]))
            .fold(0.0, f64::max)
    }
}

/// Periods of `w_k(z) dz` on every loop, collecting those that do not vanish.
fn exactness(
    domain: &CircularDomain,
    names: &[&str],
    forms: impl Fn(C64, &mut [C64]) -> Result<(), HoloError>,
    quad: &QuadratureSpec,
) -> Result<(), SurfaceError> {
    let mut failures = Vec::new();
    for (j, lp) in domain.loops().iter().enumerate() {
        let p = contour_integral_vec::<SurfaceError, _>(
            names.len(),
            |z, out| Ok(forms(z, out)?),
            lp,
            quad,
        )?;
        for (name, v) in names.iter().zip(&p.value) {
            if v.norm() > EXACT_TOL {
                failures.push(ExactnessFailure {
                    form: name.to_string(),
                    loop_index: j,
                    period: *v,
                });
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(SurfaceError::ExactnessFailed(failures))
    }
}

/// `e^{is} h`, after checking that all complex periods of `h f` vanish.
pub fn associated_family(
    f: &dyn NullField,
    h: &ExpMultiplier,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<ExpMultiplier, SurfaceError> {
    let p = period_map(f, h, &f.domain().loops(), quad)?;
    for (j, row) in p.rows.iter().enumerate() {
        let magnitude = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if magnitude > EXACT_TOL {
            return Err(SurfaceError::ComplexPeriodsNonzero {
                loop_index: j,
                magnitude,
            });
        }
    }
    Ok(h.rotated(s))
}

/// `Φ_λ = (½(1/g − λ²g), (i/2)(1/g + λ²g), λ) φ₃` for the pair, to be
/// multiplied by `h`. Requires `h φ₃`, `h g φ₃` and `h φ₃ / g` exact.
///
/// At `λ = 1` this is the Weierstrass lift of the pair; at `λ = 0` every
/// value is a multiple of `(1, i, 0)`.
pub fn flat_deformation_avoiding(
    pair: &WeierstrassPair,
    h: &dyn Holomorphic,
    lambda: f64,
    domain: &CircularDomain,
    quad: &QuadratureSpec,
) -> Result<NullData, SurfaceError> {
    let over_g = pair.phi3.div(&pair.g)?;
    let times_g = pair.phi3.mul(&pair.g);
    exactness(
        domain,
        &["phi3", "g phi3", "phi3 / g"],
        |z, out| {
            let hv = h.eval(z)?;
            out[0] = hv * pair.phi3.eval(z)?;
            out[1] = hv * times_g.eval(z)?;
            out[2] = hv * over_g.eval(z)?;
            Ok(())
        },
        quad,
    )?;
    let l2 = C64::new(lambda * lambda, 0.0);
    let scaled = if lambda == 1.0 {
        times_g.clone()
    } else {
        times_g.scale(l2)
    };
    let f1 = over_g.sub(&scaled).scale(C64::new(0.5, 0.0));
    let f2 = over_g.add(&scaled).scale(C64::new(0.0, 0.5));
    let f3 = if lambda == 1.0 {
        pair.phi3.clone()
    } else {
        pair.phi3.scale(C64::new(lambda, 0.0))
    };
    Ok(NullData::new(vec![f1, f2, f3], domain.clone())?)
}

/// `Φ_λ = (1 − λ²g², i(1 + λ²g²), 2λg) φ₃` with `g = exp(u)`.
#[derive(Debug, Clone)]
pub struct NonflatSample {
    pub g: ExpMultiplier,
    pub phi3: RationalMap,
    pub lambda: f64,
    domain: CircularDomain,
}

impl NullField for NonflatSample {
    fn dim(&self) -> usize {
        3
    }

    fn domain(&self) -> &CircularDomain {
        &self.domain
    }

    fn eval_into(&self, z: C64, out: &mut [C64]) -> Result<(), HoloError> {
        let p = self.phi3.eval(z)?;
        let lg = self.g.eval(z)? * self.lambda;
        let w = lg * lg;
        out[0] = (1.0 - w) * p;
        out[1] = C64::new(0.0, 1.0) * (1.0 + w) * p;
        out[2] = 2.0 * lg * p;
        Ok(())
    }
}

/// The `λ`-sample deforming the flat data `(1, i, 0) φ₃`. Requires `φ₃`
/// nowhere zero on the domain and `φ₃`, `g φ₃`, `g² φ₃` exact.
pub fn nonflat_deformation(
    g: &ExpMultiplier,
    phi3: &RationalMap,
    lambda: f64,
    domain: &CircularDomain,
    quad: &QuadratureSpec,
) -> Result<NonflatSample, SurfaceError> {
    if let Some((p, _)) = phi3
        .zeros()
        .into_iter()
        .find(|(p, _)| domain.contains_closed(*p, 1e-12))
    {
        return Err(SurfaceError::ZeroInDomain {
            what: "phi3",
            point: p,
        });
    }
    exactness(
        domain,
        &["phi3", "g phi3", "g^2 phi3"],
        |z, out| {
            let p = phi3.eval(z)?;
            let gv = g.eval(z)?;
            out[0] = p;
            out[1] = gv * p;
            out[2] = gv * gv * p;
            Ok(())
        },
        quad,
    )?;
    Ok(NonflatSample {
        g: g.clone(),
        phi3: phi3.clone(),
        lambda,
        domain: domain.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational;
    use crate::nullcurve::lift_weierstrass;

    fn annulus() -> CircularDomain {
        CircularDomain::annulus(C64::new(0.0, 0.0), 0.3).unwrap()
    }

    #[test]
    fn catenoid_pair_is_not_exact() {
        let pair = WeierstrassPair::new(RationalMap::z(), parse_rational("1/z").unwrap());
        let one = ExpMultiplier::identity(&annulus(), 0);
        match flat_deformation_avoiding(&pair, &one, 0.5, &annulus(), &QuadratureSpec::default()) {
            Err(SurfaceError::ExactnessFailed(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].form, "phi3");
                assert!((v[0].period - C64::new(0.0, std::f64::consts::TAU)).norm() < 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lambda_one_is_the_lift() {
        let d = CircularDomain::disk();
        let pair = WeierstrassPair::new(parse_rational("z + 2").unwrap(), RationalMap::one());
        let one = ExpMultiplier::identity(&d, 0);
        let f =
            flat_deformation_avoiding(&pair, &one, 1.0, &d, &QuadratureSpec::default()).unwrap();
        assert_eq!(f, lift_weierstrass(&pair, &d).unwrap());
        let f0 =
            flat_deformation_avoiding(&pair, &one, 0.0, &d, &QuadratureSpec::default()).unwrap();
        let c = f0.components();
        assert!(c[2].is_zero());
        assert!(c[1].approx_eq(&c[0].scale(C64::new(0.0, 1.0)), 1e-15));
    }

    #[test]
    fn raw_catenoid_has_no_associated_family() {
        let d = annulus();
        let f = lift_weierstrass(
            &WeierstrassPair::new(RationalMap::z(), parse_rational("1/z").unwrap()),
            &d,
        )
        .unwrap();
        let one = ExpMultiplier::identity(&d, 0);
        assert!(matches!(
            associated_family(
                &f,
                &one,
                std::f64::consts::FRAC_PI_2,
                &QuadratureSpec::default()
            ),
            Err(SurfaceError::ComplexPeriodsNonzero { loop_index: 0, .. })
        ));
    }

    #[test]
    fn nonflat_at_zero_is_flat_input() {
        let d = CircularDomain::disk();
        let g = ExpMultiplier::identity(&d, 2);
        let s = nonflat_deformation(&g, &RationalMap::one(), 0.0, &d, &QuadratureSpec::default())
            .unwrap();
        let v = s.eval(C64::new(0.2, 0.1)).unwrap();
        assert_eq!(
            v,
            vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)]
        );
        assert!(matches!(
            nonflat_deformation(&g, &RationalMap::z(), 1.0, &d, &QuadratureSpec::default()),
            Err(SurfaceError::ZeroInDomain { .. })
        ));
    }
}
