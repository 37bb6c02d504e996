use alh_core::gluemass::*;
use alh_core::mass::{MassAspect, MassSetup, DEFAULT_LADDER};
use alh_core::HMParams;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

/// Midpoint rule for ∫_{[-½,½]²} |z||log|z||; even m keeps the origin off
/// the nodes.
fn midpoint_upper(m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let mut s = 0.0;
    for a in 0..m {
        for b in 0..m {
            let r = ((a as f64 + 0.5) * h - 0.5).hypot((b as f64 + 0.5) * h - 0.5);
            s += r * r.ln().abs();
        }
    }
    s * h * h
}

#[test]
fn upper_bracket_matches_a_midpoint_oracle() {
    let oracle = midpoint_upper(2000);
    let b = hm_bracket(1.0).unwrap();
    assert!((b.upper + 2.0 * oracle).abs() < 1e-5, "{} vs {}", b.upper, -2.0 * oracle);
    assert!(b.weak_lower < b.lower && b.lower < b.upper && b.upper < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bracket_is_linear_in_the_mass(m in 0.0..5.0f64) {
        let one = hm_bracket(1.0).unwrap();
        let b = hm_bracket(m).unwrap();
        for (x, y) in [(b.lower, one.lower), (b.upper, one.upper), (b.weak_lower, one.weak_lower)] {
            prop_assert!((x - m * y).abs() < 1e-12 * (1.0 + m));
        }
    }

    #[test]
    fn area_is_minus_two_pi_chi(necks in 1usize..50) {
        for scheme in [GenusScheme::SymmetricDouble, GenusScheme::SelfHandles] {
            let r = genus_bookkeeping(necks, scheme).unwrap();
            prop_assert_eq!(r.euler, 2 - 2 * r.genus);
            prop_assert!((r.area + 2.0 * PI * r.euler as f64).abs() < 1e-9);
            prop_assert_eq!(r.area_over_pi, 4 * necks as i64);
        }
    }
}

#[test]
fn negative_mass_bracket_is_rejected() {
    assert!(hm_bracket(-1.0).is_err());
    assert!(genus_bookkeeping(0, GenusScheme::SymmetricDouble).is_err());
}

fn hm_summand(m_c: f64, psi: Arc<dyn BoundaryWeight>) -> Summand {
    let p = HMParams::new(3, m_c).unwrap();
    let setup = MassSetup::hm(&p);
    let v = setup.background_potential();
    let mut s = Summand::new(setup.clone(), v, psi);
    s.aspect = Some(MassAspect::from_metric(&setup, &DEFAULT_LADDER).unwrap());
    s
}

#[test]
fn unit_weights_recover_the_summand_masses() {
    let spec = GluingSpec::new(
        vec![hm_summand(1.0, Arc::new(1.0)), hm_summand(0.5, Arc::new(1.0))],
        NeckScheme::Localised,
    )
    .unwrap();
    let g = glued_mass(&spec, &DEFAULT_LADDER).unwrap();
    assert!((g.summands[0] + 2.0).abs() < 1e-5, "{:?}", g.summands);
    assert!((g.summands[1] + 1.0).abs() < 1e-5, "{:?}", g.summands);
    assert!((glued_mass_aspect(&spec).unwrap() + 3.0).abs() < 1e-5);
}

#[test]
fn positive_weights_give_negative_mass() {
    let p = HMParams::new(3, 1.0).unwrap();
    let period = p.psi_period;
    let w: Arc<dyn BoundaryWeight> = Arc::new(FnWeight(move |y: &[f64]| 1.0 + 0.6 * (2.0 * PI * y[0] / period).sin()));
    let w2: Arc<dyn BoundaryWeight> = Arc::new(FnWeight(|y: &[f64]| 0.2 + (y[1] * 0.7).cos().powi(2)));
    let spec = GluingSpec::new(vec![hm_summand(1.0, w), hm_summand(2.0, w2)], NeckScheme::Localised).unwrap();
    let m = glued_mass_aspect(&spec).unwrap();
    assert!(m < 0.0, "{m}");
}

#[test]
fn zero_weight_inside_the_excised_disc() {
    let mut s = hm_summand(1.0, Arc::new(1.0));
    let p = HMParams::new(3, 1.0).unwrap();
    let (pp, pt) = (p.psi_period, p.theta_periods[0]);
    s.neck = Some((vec![0.5 * pp, 0.5 * pt], 0.3 * pt.min(pp)));
    let ils = GluingSpec::new(vec![s.clone()], NeckScheme::Ils).unwrap();
    let loc = GluingSpec::new(vec![s], NeckScheme::Localised).unwrap();
    let (a, b) = (glued_mass_aspect(&ils).unwrap(), glued_mass_aspect(&loc).unwrap());
    // removing part of a negative density raises the total
    assert!(a > b && a < 0.0, "{a} {b}");
}

#[test]
fn constant_weight_diagnostics_scale_with_area() {
    let d = annulus_diagnostics(0.1, [0.0, 0.0], &|_| Ok(1.0)).unwrap();
    let area = PI * (0.04 - 0.0025);
    assert!((d.area - area).abs() < 1e-10);
    assert!((d.psi_term - area).abs() < 1e-10);
    assert!(d.gradient_term.abs() < 1e-8 && d.hessian_term.abs() < 1e-4);
}
