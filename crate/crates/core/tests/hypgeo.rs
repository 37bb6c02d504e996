use alh_core::hypgeo::*;
use proptest::prelude::*;

fn hyperplane(n: usize) -> impl Strategy<Value = HyperbolicHyperplane> {
    (prop::collection::vec(-2.0..2.0f64, n - 1), 0.3..3.0f64)
        .prop_map(|(c, r)| HyperbolicHyperplane::new(c, r).unwrap())
}

fn half_space_point(n: usize) -> impl Strategy<Value = ModelPoint> {
    (prop::collection::vec(-3.0..3.0f64, n - 1), 0.05..3.0f64).prop_map(|(mut c, z)| {
        c.push(z);
        ModelPoint::half_space(c).unwrap()
    })
}

fn dim_case() -> impl Strategy<Value = (HyperbolicHyperplane, HyperbolicHyperplane, ModelPoint)> {
    (2usize..=4).prop_flat_map(|n| (hyperplane(n), hyperplane(n), half_space_point(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_maps_are_isometries((h1, h2, p) in dim_case()) {
        for sign in [Sign::Plus, Sign::Minus] {
            let l = lambda_map(&h1, sign);
            prop_assert!(l.pullback_residual(&p).unwrap() < 1e-10);
            let q = l.apply(&p).unwrap();
            prop_assert!(l.inverse().pullback_residual(&q).unwrap() < 1e-10);
        }
        let t = glue_transition(&lambda_map(&h1, Sign::Plus), &lambda_map(&h2, Sign::Minus)).unwrap();
        prop_assert!(t.pullback_residual(&p).unwrap() < 1e-10);
    }

    #[test]
    fn plus_then_reflection_is_minus((h, _h2, p) in dim_case()) {
        let n = h.dim();
        let via = lambda_map(&h, Sign::Plus).then(&ball_reflection(n)).unwrap().apply(&p).unwrap();
        let direct = lambda_map(&h, Sign::Minus).apply(&p).unwrap();
        for (a, b) in via.coords.iter().zip(&direct.coords) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sides_partition_and_thin_is_bounded((h, _h2, p) in dim_case()) {
        let side = classify_side(&h, &p).unwrap();
        if side == Side::Thin {
            // inside the Euclidean half-ball around the centre
            let n = p.dim();
            let d2: f64 = h.center.iter().zip(&p.coords).map(|(c, x)| (x - c).powi(2)).sum::<f64>() + p.coords[n - 1].powi(2);
            prop_assert!(d2.sqrt() <= h.radius);
        }
        // the Plus map sends the fat side up and the thin side down
        let image = lambda_map(&h, Sign::Plus).apply(&p).unwrap();
        let up = image.coords[p.dim() - 1];
        match side {
            Side::Fat => prop_assert!(up > -1e-12),
            Side::Thin => prop_assert!(up < 1e-12),
            Side::On => prop_assert!(up.abs() < 1e-9),
        }
    }

    #[test]
    fn cayley_is_an_involution(p in (2usize..=4).prop_flat_map(half_space_point)) {
        let q = cayley(&cayley(&p).unwrap()).unwrap();
        for (a, b) in q.coords.iter().zip(&p.coords) {
            prop_assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn mirror_double_restricts_to_f(i in 2.0..1e4f64, t in 0.0..=1.0f64, phi in 0.0..6.28f64) {
        let f = |rho: f64, phi: f64| rho.ln() * phi.cos() + rho * rho;
        let fh = mirror_double(f, i).unwrap();
        let rho = (i.ln() * (t - 1.0)).exp();
        prop_assert_eq!(fh(t, phi), f(rho, phi));
        prop_assert_eq!(fh(-t, phi), fh(t, phi));
    }
}

#[test]
fn points_on_the_hyperplane_land_on_the_equator() {
    let h = HyperbolicHyperplane::new(vec![0.4, -1.0], 1.7).unwrap();
    for a in [0.2, 0.7, 1.3] {
        let x = h.point_at(&upper_direction(&[a, 2.0 * a]));
        let p = ModelPoint::half_space(x).unwrap();
        assert_eq!(classify_side(&h, &p).unwrap(), Side::On);
        let img = lambda_map(&h, Sign::Minus).apply(&p).unwrap();
        assert!(img.coords[2].abs() < 1e-12);
    }
}
