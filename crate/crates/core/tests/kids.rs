use alh_core::kids::*;
use alh_core::metrics::{bk_spatial, hm_spatial, horizon_radius};
use alh_core::{BKParams, Boundary, HMParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bk_generic_potential(n in 3usize..=5, k in -1i32..=1, m_c in 0.05..2.0f64, c in -2.0..2.0f64, seed in 0u64..1000) {
        let p = BKParams::with_default_boundary(n, k, m_c).unwrap();
        let r0 = horizon_radius(&p).map(|h| h.r0).unwrap_or(0.0);
        let v = StaticPotential::BKGeneric { params: p.clone(), c_tilde: c };
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let x = random_point(&p.boundary, &mut rng, r0 + 0.3, r0 + 5.0);
        prop_assert!(kid_residual(&bk_spatial(&p), &v, &x).unwrap().max < 1e-8);
    }

    #[test]
    fn zero_mass_family(n in 3usize..=5, k in -1i32..=1, seed in 0u64..1000) {
        let p = BKParams::with_default_boundary(n, k, 0.0).unwrap();
        let fam = bk_zero_mass_potentials(n, k, p.boundary).unwrap();
        prop_assert!(fam.verify(5, seed).unwrap() < 1e-8);
    }

    #[test]
    fn hm_family(n in 3usize..=5, m_c in 0.1..2.0f64, c1 in -2.0..2.0f64, ci in prop::collection::vec(-1.0..1.0f64, 3), r in 0.2..5.0f64) {
        let p = HMParams::new(n, m_c).unwrap();
        let v = StaticPotential::HMFamily { params: p.clone(), c1, c_i: ci[..n - 2].to_vec() };
        let mut x = vec![p.r0() + r, 0.3 * p.psi_period];
        x.extend(p.theta_periods.iter().map(|t| 0.45 * t));
        prop_assert!(kid_residual(&hm_spatial(&p), &v, &x).unwrap().max < 1e-8);
    }

    #[test]
    fn two_dimensional_family(m_c in -2.0..2.0f64, c in prop::collection::vec(-1.0..1.0f64, 4), dr in 0.3..5.0f64, psi in 0.0..6.0f64) {
        let v = n2_potentials(m_c).potential(c[0], c[1], c[2], c[3]);
        let r = (2.0 * m_c).max(0.0).sqrt() + dr;
        prop_assert!(kid_residual(&v.metric(), &v, &[r, psi]).unwrap().max < 1e-8);
    }
}

#[test]
fn potentials_of_a_different_mass_fail() {
    // c̃√f for m_c = 1 is not static on the m_c = 2 metric
    let p1 = BKParams::with_default_boundary(3, 1, 1.0).unwrap();
    let p2 = BKParams::with_default_boundary(3, 1, 2.0).unwrap();
    let v = StaticPotential::BKGeneric { params: p1, c_tilde: 1.0 };
    assert!(kid_residual(&bk_spatial(&p2), &v, &[3.0, 1.0, 2.0]).unwrap().max > 1e-3);
}

#[test]
fn mass_sign_branches() {
    assert_eq!(n2_potentials(1.0).sign, MassSign::Positive);
    assert_eq!(n2_potentials(0.0).sign, MassSign::Zero);
    assert_eq!(n2_potentials(-1.0).sign, MassSign::Negative);
    let torus = Boundary::FlatTorus { periods: vec![1.0, 1.0] };
    assert_eq!(bk_zero_mass_potentials(3, 0, torus).unwrap().omega_len, 2);
}
