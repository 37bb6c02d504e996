use alh_core::conformal::{
    default_x_ladder, geodesic_gauge_shoot, BoundaryConformalData, BoundaryGeometry, ConformalFactor, FGMetric,
};
use alh_core::gluemass::hm_bracket;
use alh_core::kids::{kid_residual, StaticPotential};
use alh_core::mass::{mass_aspect_formula, mass_u_flux, MassAspect, MassSetup};
use alh_core::metrics::{curvature, einstein_residual, hm_spacetime, hm_spatial};
use alh_core::yamabe::{solve, PuncturedTorusDomain};
use alh_core::HMParams;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn geometry(c: &mut Criterion) {
    let p = HMParams::new(4, 1.0).unwrap();
    let g = hm_spatial(&p);
    let st = hm_spacetime(&p);
    let x = vec![3.0, 0.2, 0.3, 0.4];
    let xt = vec![0.0, 3.0, 0.2, 0.3, 0.4];
    c.bench_function("curvature hm n=4", |b| b.iter(|| curvature(&g, black_box(&x)).unwrap()));
    c.bench_function("einstein residual hm n=4", |b| b.iter(|| einstein_residual(&st, black_box(&xt)).unwrap()));
    let v = StaticPotential::HMFamily { params: p.clone(), c1: 1.0, c_i: vec![0.0, 0.0] };
    c.bench_function("kid residual hm n=4", |b| b.iter(|| kid_residual(&g, &v, black_box(&x)).unwrap()));
}

fn mass(c: &mut Criterion) {
    let s = MassSetup::hm(&HMParams::new(3, 1.0).unwrap());
    let v = s.background_potential();
    c.bench_function("u-flux R=32 hm n=3", |b| b.iter(|| mass_u_flux(&s, &v, black_box(32.0)).unwrap()));
    c.bench_function("aspect R=32 hm n=3", |b| {
        b.iter(|| mass_aspect_formula(&MassAspect::at_radius(&s, black_box(32.0)).unwrap(), 3))
    });
    c.bench_function("hm bracket", |b| b.iter(|| hm_bracket(black_box(1.0)).unwrap()));
}

fn yamabe(c: &mut Criterion) {
    let d = PuncturedTorusDomain::standard(1, 16.0).unwrap();
    let mut group = c.benchmark_group("yamabe");
    group.sample_size(10);
    group.bench_function("solve N=64 i=16", |b| b.iter(|| solve(black_box(&d), 64).unwrap()));
    group.finish();
}

fn conformal(c: &mut Criterion) {
    let periods = vec![1.0, 1.0];
    let phi = ConformalFactor::random_exp_trig(&periods, 3, 2, 0.15, 5);
    let data = BoundaryConformalData::new(BoundaryGeometry::FlatTorus { periods }, phi, 32).unwrap();
    c.bench_function("spectral grid 32^2", |b| b.iter(|| data.grid().unwrap()));
    let g = FGMetric::hyperbolic(3, 0.0);
    let ladder = default_x_ladder();
    let starts = vec![vec![0.3, 0.7]];
    c.bench_function("gauge shoot one ray", |b| {
        b.iter(|| geodesic_gauge_shoot(&g, &data, black_box(&starts), &ladder).unwrap())
    });
}

criterion_group!(benches, geometry, mass, yamabe, conformal);
criterion_main!(benches);
