use std::f64::consts::TAU;

use criterion::{criterion_group, criterion_main, Criterion};
use gaussflux::periodsolver::{periods, solve_multiplier};
use gaussflux::surface::{conformality_residual, integrate_immersion, spherical_area};
use gaussflux::{
    CircularDomain, DomainGrid, ExpMultiplier, PeriodTarget, QuadratureSpec, RationalMap,
    SolveOptions, C64,
};
use gaussflux_bench::{annulus, catenoid, planar_ends};

fn quadrature(c: &mut Criterion) {
    let f = catenoid();
    let quad = QuadratureSpec::default();
    c.bench_function("periods catenoid", |b| {
        b.iter(|| periods(&f, &quad).unwrap())
    });
}

fn solve(c: &mut Criterion) {
    let f = catenoid();
    let target = PeriodTarget::from_flux(&[vec![0.0, 0.0, TAU]]);
    let opts = SolveOptions::default();
    c.bench_function("solve catenoid flux", |b| {
        b.iter(|| solve_multiplier(&f, &target, &opts).unwrap())
    });

    let g = planar_ends();
    let target = PeriodTarget::from_flux(&[vec![0.3, -0.2, 0.5], vec![-0.4, 0.1, 0.2]]);
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    group.bench_function("planar ends, two holes", |b| {
        b.iter(|| solve_multiplier(&g, &target, &opts).unwrap())
    });
    group.finish();
}

fn surface(c: &mut Criterion) {
    let f = catenoid();
    let one = ExpMultiplier::identity(&annulus(), 0);
    let grid = DomainGrid::build(&annulus(), 64, 0.02).unwrap();
    let p0 = grid.nodes()[grid.len() / 2];
    let quad = QuadratureSpec::default();
    c.bench_function("integrate 64", |b| {
        b.iter(|| integrate_immersion(&f, &one, &grid, p0, &[0.0; 3], &quad).unwrap())
    });
    let x = integrate_immersion(&f, &one, &grid, p0, &[0.0; 3], &quad).unwrap();
    c.bench_function("conformality 64", |b| {
        b.iter(|| conformality_residual(&x).unwrap())
    });
    let g = RationalMap::z().scale(C64::new(0.5, 0.0));
    let disk = CircularDomain::disk();
    c.bench_function("spherical area", |b| {
        b.iter(|| spherical_area(&g, &disk, 8).unwrap())
    });
}

criterion_group!(benches, quadrature, solve, surface);
criterion_main!(benches);
