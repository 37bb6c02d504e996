use alh_core::metrics::*;
use alh_core::{BKParams, HMParams};
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bk_spacetime_is_einstein(n in 3usize..=5, k in -1i32..=1, m_c in 0.05..3.0f64, dr in 0.2..5.0f64, s in 0.0..1.0f64) {
        let p = BKParams::with_default_boundary(n, k, m_c).unwrap();
        let r0 = horizon_radius(&p).map(|h| h.r0).unwrap_or(0.0);
        let mut x = vec![0.3, r0 + dr];
        for a in 0..n - 1 {
            // interior angles for spheres, any value for tori
            x.push(0.4 + 0.9 * s + 0.1 * a as f64);
        }
        prop_assert!(einstein_residual(&bk_spacetime(&p), &x).unwrap().max() < 1e-8);
        // the static slice is time symmetric, so R = -n(n-1)
        let c = curvature(&bk_spatial(&p), &x[1..]).unwrap();
        let nf = n as f64;
        prop_assert!((c.scalar + nf * (nf - 1.0)).abs() < 1e-8 * nf * nf);
    }

    #[test]
    fn horizon_is_a_root(n in 3usize..=5, k in -1i32..=1, m_c in 0.05..3.0f64) {
        let p = BKParams::with_default_boundary(n, k, m_c).unwrap();
        let h = horizon_radius(&p).unwrap();
        prop_assert!(p.f(h.r0).abs() < 1e-10 * (1.0 + h.r0 * h.r0));
        prop_assert!(p.f(h.r0 * 1.01) > 0.0);
    }

    #[test]
    fn hm_is_smooth_at_the_tip(n in 3usize..=5, m_c in 0.1..3.0f64) {
        let p = HMParams::new(n, m_c).unwrap();
        // F(r) = r² - 2m_c r^{2-n}: r0 = (2 m_c)^{1/n}, F'(r0) = n r0
        let r0 = (2.0 * m_c).powf(1.0 / n as f64);
        prop_assert!((p.r0() - r0).abs() < 1e-12 * r0);
        prop_assert!((p.psi_period - 4.0 * PI / (n as f64 * r0)).abs() < 1e-12 * p.psi_period);
        prop_assert!((p.boundary_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_and_numeric_curvature_agree(m_c in 0.1..2.0f64, r in 2.0..6.0f64, psi in 0.0..1.0f64) {
        let p = HMParams::new(4, m_c).unwrap();
        let g = hm_spatial(&p);
        let x = vec![r, psi * p.psi_period, 0.3, 0.6];
        let a = curvature(&g, &x).unwrap();
        let b = curvature_numeric(&g, &x).unwrap();
        let scale = a.ricci.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (u, v) in a.ricci.iter().zip(&b.ricci) {
            prop_assert!((u - v).abs() < 1e-5 * scale);
        }
    }
}

#[test]
fn hm_spacetime_is_einstein() {
    for n in 3..=5 {
        let p = HMParams::new(n, 1.0).unwrap();
        let mut x = vec![0.0, 2.5, 0.1];
        x.extend(vec![0.2; n - 2]);
        assert!(einstein_residual(&hm_spacetime(&p), &x).unwrap().max() < 1e-8);
    }
}
