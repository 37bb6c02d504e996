use alh_core::kids::StaticPotential;
use alh_core::mass::*;
use alh_core::{BKParams, Boundary, HMParams};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn boost(chis: &[f64]) -> DMatrix<f64> {
    let mut l = DMatrix::identity(4, 4);
    for (a, c) in chis.iter().enumerate() {
        l = lorentz_boost(4, a + 1, *c) * l;
    }
    l
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hm_closed_form(n in 3usize..=4, m_c in 0.3..3.0f64) {
        let s = MassSetup::hm(&HMParams::new(n, m_c).unwrap());
        let v = s.background_potential();
        let target = -2.0 * (n as f64 - 2.0) * m_c;
        for f in [MassFormula::UFlux, MassFormula::Aspect] {
            let r = mass_report(f, &s, &v, &DEFAULT_LADDER).unwrap();
            prop_assert!((r.limit - target).abs() < 1e-5 * target.abs().max(1.0), "{:?}: {}", f, r.limit);
        }
    }

    #[test]
    fn linear_in_the_potential(a in -2.0..2.0f64, b in -2.0..2.0f64, om in prop::collection::vec(-1.0..1.0f64, 3)) {
        let p = BKParams::new(3, 1, 1.0, Boundary::RoundSphere { dim: 2 }).unwrap();
        let s = MassSetup::bk(&p);
        let v1 = s.background_potential();
        let v2 = StaticPotential::BKZeroMass { params: BKParams { m_c: 0.0, ..p.clone() }, c_tilde: 0.4, c_hat: -0.2, omega: om };
        let combo = LinearCombination(vec![(a, v1.clone()), (b, v2.clone())]);
        let lhs = mass_u_flux(&s, &combo, 16.0).unwrap();
        let rhs = a * mass_u_flux(&s, &v1, 16.0).unwrap() + b * mass_u_flux(&s, &v2, 16.0).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn aspect_is_linear(c in -3.0..3.0f64) {
        let s = MassSetup::hm(&HMParams::new(3, 1.0).unwrap());
        let asp = MassAspect::at_radius(&s, 16.0).unwrap();
        let m = mass_aspect_formula(&asp, 3);
        prop_assert!((mass_aspect_formula(&asp.scaled(c), 3) - c * m).abs() < 1e-12 * m.abs().max(1.0));
    }

    #[test]
    fn additivity_commutes_with_boosts(
        c1 in prop::collection::vec(-1.0..1.0f64, 3),
        c2 in prop::collection::vec(-1.0..1.0f64, 3),
        g in prop::collection::vec(-1.0..1.0f64, 3),
        m1 in prop::collection::vec(-1.0..1.0f64, 4),
        m2 in prop::collection::vec(-1.0..1.0f64, 4),
    ) {
        let (l1, l2, lg) = (boost(&c1), boost(&c2), boost(&g));
        let (e1, e2) = (EnergyMomentum::Vector(m1), EnergyMomentum::Vector(m2));
        let EnergyMomentum::Vector(base) = lorentz_add(&l1, &e1, &l2, &e2).unwrap() else { unreachable!() };
        let EnergyMomentum::Vector(moved) = lorentz_add(&(&lg * &l1), &e1, &(&lg * &l2), &e2).unwrap() else { unreachable!() };
        let expect = &lg * DVector::from_column_slice(&base);
        let scale = expect.amax().max(1.0);
        for (a, b) in expect.iter().zip(&moved) {
            prop_assert!((a - b).abs() < 1e-10 * scale);
        }
        let (q0, q1) = (minkowski_square(&base), minkowski_square(&moved));
        prop_assert!((q0 - q1).abs() < 1e-10 * scale * scale);
    }

    #[test]
    fn richardson_is_exact_on_pure_powers(l in -5.0..5.0f64, c in -3.0..3.0f64, p in 1.0..4.0f64) {
        let radii = DEFAULT_LADDER.to_vec();
        let vals: Vec<f64> = radii.iter().map(|r| l + c * r.powf(-p)).collect();
        let e = extrapolate_limit(&radii, &vals).unwrap();
        prop_assert!((e.limit - l).abs() < 1e-9 * (1.0 + c.abs()));
        if c.abs() > 0.1 {
            prop_assert!((e.order - p).abs() < 1e-6);
        }
    }
}

#[test]
fn scalar_masses_add_and_mixing_is_rejected() {
    let i = DMatrix::identity(4, 4);
    let s = lorentz_add(&i, &EnergyMomentum::Scalar(1.5), &i, &EnergyMomentum::Scalar(-0.25)).unwrap();
    assert_eq!(s, EnergyMomentum::Scalar(1.25));
    assert!(lorentz_add(&i, &EnergyMomentum::Scalar(1.0), &i, &EnergyMomentum::Vector(vec![1.0; 4])).is_err());
    let mut bad = DMatrix::identity(4, 4);
    bad[(0, 1)] = 0.5;
    assert!(lorentz_add(&bad, &EnergyMomentum::Scalar(1.0), &i, &EnergyMomentum::Scalar(1.0)).is_err());
}

#[test]
fn all_evaluators_agree_for_hm_n5() {
    let s = MassSetup::hm(&HMParams::new(5, 0.5).unwrap());
    let v = s.background_potential();
    for f in MassFormula::ALL {
        let r = mass_report(f, &s, &v, &DEFAULT_LADDER).unwrap();
        assert!((r.limit + 3.0).abs() < 1e-5, "{f:?}: {}", r.limit);
    }
}
