use std::f64::consts::{FRAC_PI_2, PI, TAU};

use gaussflux::expr::{parse_rational, Expr};
use gaussflux::geometry::{contour_integral, path_integral};
use gaussflux::holomorphic::winding_number;
use gaussflux::nullcurve::lift_weierstrass;
use gaussflux::periodsolver::period_map;
use gaussflux::surface::{first_fundamental_form, integrate_immersion, spherical_area};
use gaussflux::{
    CircularDomain, DomainGrid, ExpMultiplier, LaurentExpansion, NullField, PathInDomain,
    PeriodTarget, Polynomial, QuadratureSpec, RationalMap, WeierstrassPair, C64,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn point(r_max: f64) -> impl Strategy<Value = C64> {
    (0.0..r_max, 0.0..TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

/// An annulus with an off-center hole.
fn annulus() -> impl Strategy<Value = CircularDomain> {
    (point(0.25), 0.1..0.3f64).prop_map(|(z, r)| CircularDomain::annulus(z, r).unwrap())
}

fn cauchy(a: C64) -> RationalMap {
    RationalMap::cauchy(a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rational_arithmetic_matches_pointwise(
        a in point(2.0), b in point(2.0), s in point(3.0), z in point(1.0),
    ) {
        let p = RationalMap::from_polynomial(Polynomial::from_roots(&[a, s]));
        let q = cauchy(b);
        prop_assume!((z - b).norm() > 0.05);
        let (pz, qz) = (p.eval(z).unwrap(), q.eval(z).unwrap());
        let tol = 1e-10 * (1.0 + pz.norm() * qz.norm() + pz.norm() + qz.norm());
        prop_assert!((p.mul(&q).eval(z).unwrap() - pz * qz).norm() < tol);
        prop_assert!((p.add(&q).eval(z).unwrap() - (pz + qz)).norm() < tol);
        prop_assert!((p.sub(&p).eval(z).unwrap()).norm() < tol);
        prop_assume!(pz.norm() > 1e-3);
        let one = p.div(&p).unwrap();
        prop_assert!((one.eval(z).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn derivative_agrees_with_difference_quotient(a in point(2.0), b in point(2.0), z in point(0.8)) {
        prop_assume!((z - b).norm() > 0.2);
        let r = RationalMap::from_polynomial(Polynomial::from_roots(&[a, a + 0.5])).mul(&cauchy(b));
        let h = 1e-5;
        let fd = (r.eval(z + h).unwrap() - r.eval(z - h).unwrap()) / (2.0 * h);
        let d = r.derivative().eval(z).unwrap();
        prop_assert!((fd - d).norm() < 1e-5 * (1.0 + d.norm()));
    }

    #[test]
    fn expression_and_rational_parsers_agree(
        coeffs in prop::collection::vec(-5i32..=5, 1..5),
        den in -5i32..=5,
        z in point(0.9),
    ) {
        let num: Vec<String> = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| format!("({a})*z^{k}"))
            .collect();
        let src = format!("({}) / (z - ({den}))", num.join(" + "));
        let poly = Polynomial::new(coeffs.iter().map(|&a| c(a as f64, 0.0)).collect());
        let expected = poly.eval(z) / (z - den as f64);
        let e = Expr::parse(&src, "z").unwrap().eval(z);
        let r = parse_rational(&src).unwrap().eval(z).unwrap();
        let tol = 1e-12 * (1.0 + expected.norm());
        prop_assert!((e - expected).norm() < tol, "{src}: {e} vs {expected}");
        prop_assert!((r - expected).norm() < tol, "{src}: {r} vs {expected}");
    }

    #[test]
    fn contour_integrals_of_powers(domain in annulus(), inner in 0.0..0.5f64, k in -4i32..4) {
        let hole = domain.holes()[0];
        let a = hole.center + inner * hole.radius;
        let lp = &domain.loops()[0];
        let v = contour_integral(|z| (z - a).powi(k), lp, &QuadratureSpec::default()).unwrap();
        let expected = if k == -1 { c(0.0, TAU) } else { c(0.0, 0.0) };
        prop_assert!((v - expected).norm() < 1e-10, "k = {k}: {v}");
    }

    #[test]
    fn path_integral_is_additive_and_exact(a in point(0.9), b in point(0.9), e in point(0.9)) {
        let disk = CircularDomain::disk();
        let quad = QuadratureSpec::default();
        let f = |z: C64| z * z + z.exp();
        let anti = |z: C64| z * z * z / 3.0 + z.exp();
        let ab = PathInDomain::segment(a, b, &disk).unwrap();
        let be = PathInDomain::segment(b, e, &disk).unwrap();
        let whole = ab.concat(&be).unwrap();
        let i_ab = path_integral(f, &ab, &disk, &quad).unwrap();
        let i_be = path_integral(f, &be, &disk, &quad).unwrap();
        let i_whole = path_integral(f, &whole, &disk, &quad).unwrap();
        prop_assert!((i_ab + i_be - i_whole).norm() < 1e-12);
        prop_assert!((i_whole - (anti(e) - anti(a))).norm() < 1e-12);
    }

    #[test]
    fn winding_counts_zeros_inside_the_hole(
        domain in annulus(),
        inside in prop::collection::vec((0.0..0.5f64, 0.0..TAU), 0..4),
        outside in prop::collection::vec((1.5..3.0f64, 0.0..TAU), 0..3),
    ) {
        let hole = domain.holes()[0];
        let mut roots: Vec<C64> = inside
            .iter()
            .map(|&(r, t)| hole.center + C64::from_polar(r * hole.radius, t))
            .collect();
        roots.extend(outside.iter().map(|&(r, t)| C64::from_polar(r, t)));
        let p = RationalMap::from_polynomial(Polynomial::from_roots(&roots));
        let w = winding_number(&p, &domain.loops()[0], &QuadratureSpec::default()).unwrap();
        prop_assert_eq!(w, inside.len() as i64);
    }

    #[test]
    fn spherical_area_of_linear_map(eps in 0.05..4.0f64, r in 0.1..0.6f64) {
        let g = RationalMap::z().scale(c(eps, 0.0));
        let cap = |rho: f64| 4.0 * PI * eps * eps * rho * rho / (1.0 + eps * eps * rho * rho);
        let disk = spherical_area(&g, &CircularDomain::disk(), 8).unwrap();
        prop_assert!((disk - cap(1.0)).abs() < 1e-8 * cap(1.0), "{disk} vs {}", cap(1.0));
        let ann = CircularDomain::annulus(c(0.0, 0.0), r).unwrap();
        let a = spherical_area(&g, &ann, 8).unwrap();
        let expected = cap(1.0) - cap(r);
        prop_assert!((a - expected).abs() < 1e-8 * cap(1.0), "{a} vs {expected}");
    }

    #[test]
    fn weierstrass_lift_is_null(domain in annulus(), inner in 0.0..0.5f64, scale in point(2.0)) {
        prop_assume!(scale.norm() > 0.1);
        let hole = domain.holes()[0];
        let a = hole.center + inner * hole.radius;
        let g = RationalMap::from_polynomial(Polynomial::linear_root(a)).scale(scale);
        let f = lift_weierstrass(&WeierstrassPair::new(g, RationalMap::one()), &domain).unwrap();
        prop_assert!(f.nullity_residual() < 1e-12, "{}", f.nullity_residual());
        prop_assert_eq!(f.dim(), 3);
    }

    #[test]
    fn periods_scale_with_constant_multiplier(domain in annulus(), delta in point(1.5)) {
        let hole = domain.holes()[0];
        let pair = WeierstrassPair::new(
            RationalMap::from_polynomial(Polynomial::linear_root(hole.center)),
            cauchy(hole.center),
        );
        let f = lift_weierstrass(&pair, &domain).unwrap();
        let quad = QuadratureSpec::default();
        let mut u = LaurentExpansion::zero(&domain, 2);
        u.shift_constant(delta);
        let base = period_map(&f, &ExpMultiplier::identity(&domain, 2), &domain.loops(), &quad).unwrap();
        let scaled = period_map(&f, &ExpMultiplier::new(u), &domain.loops(), &quad).unwrap();
        for (p, q) in base.rows.iter().flatten().zip(scaled.rows.iter().flatten()) {
            prop_assert!((p * delta.exp() - q).norm() < 1e-10);
        }
    }

    #[test]
    fn period_targets_round_trip_through_json(
        rows in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 3), 1..4),
        t in 0.0..1.0f64,
    ) {
        let target = PeriodTarget::from_flux(&rows);
        let back: PeriodTarget = serde_json::from_str(&serde_json::to_string(&target).unwrap()).unwrap();
        prop_assert_eq!(&back, &target);
        let mid = target.lerp(&target, t);
        for (a, b) in mid.values.iter().flatten().zip(target.values.iter().flatten()) {
            prop_assert!((a - b).norm() <= 4.0 * f64::EPSILON * b.norm());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn associated_family_rotates_and_preserves_the_metric(domain in annulus(), s in 0.0..TAU) {
        let hole = domain.holes()[0];
        let w = Polynomial::linear_root(hole.center);
        let pair = WeierstrassPair::new(
            RationalMap::from_polynomial(w.clone()),
            RationalMap::new(Polynomial::one(), w.powi(3)).unwrap(),
        );
        let f = lift_weierstrass(&pair, &domain).unwrap();
        let quad = QuadratureSpec::default();
        let grid = DomainGrid::build(&domain, 24, 0.05).unwrap();
        let p0 = grid.nodes()[grid.len() / 2];
        let one = ExpMultiplier::identity(&domain, 0);
        let at = |t: f64| integrate_immersion(&f, &one.rotated(t), &grid, p0, &[0.0; 3], &quad).unwrap();
        let (x0, xq, xs) = (at(0.0), at(FRAC_PI_2), at(s));
        prop_assert!(xs.closure_residual() < 1e-8);
        // X_s = cos s X_0 + sin s X_{π/2}
        for ((a, b), v) in x0.values.iter().zip(&xq.values).zip(&xs.values) {
            let scale = a.iter().chain(b).fold(1.0f64, |m, x| m.max(x.abs()));
            for j in 0..3 {
                let mix = s.cos() * a[j] + s.sin() * b[j];
                prop_assert!((mix - v[j]).abs() < 1e-12 * scale, "{mix} vs {}", v[j]);
            }
        }
        // equal up to the finite-difference truncation error
        let e0 = first_fundamental_form(&x0).unwrap();
        let es = first_fundamental_form(&xs).unwrap();
        for ((k, a), (l, b)) in e0.iter().zip(&es) {
            prop_assert_eq!(k, l);
            let scale = a[0].abs().max(a[2].abs()).max(1.0);
            for j in 0..3 {
                prop_assert!((a[j] - b[j]).abs() < 1e-6 * scale, "node {k}: {a:?} vs {b:?}");
            }
        }
    }
}
