use alh_core::conformal::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn torus(d: usize, amp: f64, res: usize, seed: u64) -> BoundaryConformalData {
    let periods = vec![1.0; d];
    let phi = ConformalFactor::random_exp_trig(&periods, 3, 2, amp, seed);
    BoundaryConformalData::new(BoundaryGeometry::FlatTorus { periods }, phi, res).unwrap()
}

fn aspect(d: usize) -> impl Fn(&[f64]) -> DMatrix<f64> {
    move |x: &[f64]| DMatrix::from_fn(d, d, |a, b| (1.0 + (a + b) as f64) * (2.0 * PI * x[(a + b) % d]).sin())
}

fn quadric_chart(d: usize) -> BoundaryConformalData {
    // 4ac - |b|² = 1: the unit sphere
    let phi = ConformalFactor::Quadric { a: 0.3, b: vec![0.2; d], c: (1.0 + 0.04 * d as f64) / 1.2 };
    BoundaryConformalData::new(BoundaryGeometry::FlatChart { lo: vec![-0.4; d], hi: vec![0.4; d] }, phi, 6).unwrap()
}

#[test]
fn quadric_factors_are_unobstructed_space_forms() {
    let data = quadric_chart(3);
    assert!(obstruction_residual(&data, 4).unwrap() < 1e-8);
    let k = kbar(&data, 4).unwrap();
    assert_eq!(k.constant, Some(1), "{} ± {}", k.mean, k.spread);
    assert!(k.obstruction.is_none());
}

#[test]
fn generic_factors_are_obstructed() {
    let data = torus(3, 0.2, 8, 7);
    assert!(obstruction_residual(&data, 4).unwrap() > 1e-4);
    assert!(kbar(&data, 4).unwrap().obstruction.is_some());
}

#[test]
fn shooting_matches_the_quadric_expansion_to_fourth_order() {
    let data = quadric_chart(2);
    let starts = vec![vec![0.0, 0.0], vec![0.1, -0.2], vec![-0.25, 0.15]];
    let rep = gauge_expansion_check(&FGMetric::hyperbolic(3, 0.0), &data, &starts, &default_x_ladder()).unwrap();
    let e = rep.coefficient_errors.unwrap();
    assert!(e[0] < 1e-6 && e[2] < 1e-6, "{e:?}");
    assert!(e[1] < 1e-4 && e[3] < 1e-4, "{e:?}");
}

#[test]
fn shooting_remainders_decay_like_r_to_the_minus_four() {
    let data = torus(2, 0.15, 16, 11);
    let starts = vec![vec![0.1, 0.7], vec![0.45, 0.2], vec![0.8, 0.9]];
    let rep = gauge_expansion_check(&FGMetric::hyperbolic(3, 0.0), &data, &starts, &default_x_ladder()).unwrap();
    assert!(rep.xbar_order >= 3.5 && rep.rbar_order >= 3.5, "{} {}", rep.xbar_order, rep.rbar_order);
    let e = rep.coefficient_errors.unwrap();
    assert!(e[0] < 1e-5 && e[2] < 1e-5, "{e:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_the_factor_scales_the_aspect_inversely(c in 0.2..5.0f64, seed in 0u64..1000) {
        let base = torus(2, 0.15, 8, seed);
        let inner = base.phi.clone();
        let scaled_phi = ConformalFactor::Custom(Arc::new(move |x| inner.eval(x).unwrap() * c));
        let scaled = BoundaryConformalData::new(base.geometry.clone(), scaled_phi, 8).unwrap();
        let mu = base.mass_aspect(3, aspect(2)).unwrap();
        let a = transform_mass_aspect(&base, &mu, 3).unwrap();
        let b = transform_mass_aspect(&scaled, &mu, 3).unwrap();
        for (x, y) in a.mu.iter().zip(&b.mu) {
            prop_assert!((x / c - y).amax() < 1e-12 * x.amax().max(1.0));
        }
        let (l, r) = aspect_integral_identity(&scaled, &mu, 3).unwrap();
        prop_assert!((l - r).abs() < 1e-10 * l.abs().max(1.0));
    }

    #[test]
    fn four_dimensional_trace_identity(seed in 0u64..10_000, amp in 0.0..0.25f64) {
        let data = torus(3, amp, 8, seed);
        let mu = data.mass_aspect(4, aspect(3)).unwrap();
        prop_assert!(mass_aspect_trace_defect(&data, &mu).unwrap() < 1e-8);
    }

    #[test]
    fn chart_round_trip(x in 0.01..1.9f64, k in -1i32..=1) {
        let k = k as f64;
        let r = r_from_x(x, k).unwrap();
        prop_assert!((x_from_r(r, k).unwrap() - x).abs() < 1e-12);
    }
}

#[test]
fn unsupported_dimensions_are_rejected() {
    let data = torus(2, 0.1, 8, 1);
    let mu = data.mass_aspect(3, aspect(2)).unwrap();
    assert!(transform_mass_aspect(&data, &mu, 5).is_err());
    assert!(data.mass_aspect(4, aspect(3)).is_err());
    let chart = quadric_chart(3);
    let mu4 = chart.mass_aspect(4, aspect(3)).unwrap();
    assert!(aspect_integral_identity(&chart, &mu4, 4).is_err());
}
