use alh_core::yamabe::*;
use proptest::prelude::*;
use std::f64::consts::PI;

// Γ(1/4) to 20 digits, independent of the gamma implementation.
const GAMMA_QUARTER: f64 = 3.6256099082219083119;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neck_solves_the_equation(li in 0.5..12.0f64, t in 0.01..0.99f64) {
        let i = li.exp();
        // ρ = i^{-2t} sweeps (1/i², 1)
        let rho = i.powf(-2.0 * t);
        prop_assert!(neck_pde_residual(i, rho).unwrap() < 1e-9);
    }

    #[test]
    fn neck_circle_is_a_geodesic(li in 0.5..30.0f64) {
        let i = li.exp();
        // circumference of ρ = 1/i is the bound
        let len = 2.0 * PI / i * (0.5 * neck_omega(i, 1.0 / i).unwrap()).exp();
        // the derivative of ρe^{ω/2} scales like i·len/2π
        prop_assert!(neck_minimality(i).unwrap().abs() < 1e-12 * i * len);
        prop_assert!((len - neck_length_bound(i)).abs() < 1e-12 * len);
    }

    #[test]
    fn hempel_bracket_is_ordered(z in 1e-6..0.999f64) {
        let (lo, hi) = hempel_bounds(z).unwrap();
        prop_assert!(0.0 < lo && lo < hi);
    }
}

#[test]
fn neck_rejects_bad_arguments() {
    assert!(neck_omega(1.0, 0.5).is_err());
    assert!(neck_omega(10.0, 1e-3).is_err());
    assert!(neck_omega(10.0, 1.0).is_err());
}

#[test]
fn hempel_constants() {
    let g2 = GAMMA_QUARTER * GAMMA_QUARTER;
    assert!((c1() - g2 * g2 / (4.0 * PI * PI)).abs() < 1e-12);
    assert!((c1() - 4.376879230452).abs() < 1e-9);
    assert!((min_density() - 4.0 * PI.powf(1.5) / g2).abs() < 1e-12);
    assert!((min_density() * sup_inverse_density() - 1.0).abs() < 1e-15);
}

#[test]
fn single_neck_gauss_bonnet_and_convergence() {
    let d = PuncturedTorusDomain::standard(1, 16.0).unwrap();
    let defects: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let s = solve(&d, n).unwrap();
            assert!(s.residual < 1e-8, "n={n}: residual {}", s.residual);
            (gauss_bonnet(&s) - 2.0 * PI).abs()
        })
        .collect();
    assert!(defects[2] / (2.0 * PI) < 5e-3);
    let order = (defects[1] / defects[2]).log2();
    assert!(order >= 1.9, "order {order}, defects {defects:?}");
}

#[test]
fn solution_lies_above_the_neck_and_the_neck_is_short() {
    let d = PuncturedTorusDomain::standard(1, 64.0).unwrap();
    let s = solve(&d, 128).unwrap();
    let c = comparison_check(&s);
    assert!(c.pass, "{c:?}");
    let l = neck_length(&s);
    assert!(l.length <= l.bound + 1e-3, "{l:?}");
}

#[test]
fn neumann_and_doubled_agree() {
    let d = PuncturedTorusDomain::standard(1, 16.0).unwrap();
    let a = solve_with(&d, GridSpec::new(64), InitialGuess::Zero).unwrap();
    let b = solve_with(&d, GridSpec::doubled(64), InitialGuess::Zero).unwrap();
    let diff = a.max_difference(&b).unwrap();
    assert!(diff < 1e-8, "{diff}");
    assert!((gauss_bonnet(&b) - 2.0 * gauss_bonnet(&a)).abs() < 1e-8);
}

#[test]
fn initial_guess_does_not_matter() {
    let d = PuncturedTorusDomain::standard(1, 64.0).unwrap();
    let a = solve_with(&d, GridSpec::new(64), InitialGuess::Zero).unwrap();
    let b = solve_with(&d, GridSpec::new(64), InitialGuess::NeckBlend).unwrap();
    assert!(a.max_difference(&b).unwrap() < 1e-8);
}

#[test]
fn two_necks_double_the_area() {
    let d = PuncturedTorusDomain::standard(2, 16.0).unwrap();
    let s = solve(&d, 128).unwrap();
    let gb = gauss_bonnet(&s);
    assert!((gb - 4.0 * PI).abs() < 5e-3 * 4.0 * PI, "{gb}");
}

#[test]
fn log_extrapolation_is_exact_on_inverse_powers() {
    let logs = [1.0, 2.0, 4.0, 8.0];
    let vals: Vec<f64> = logs.iter().map(|l| 3.0 - 2.0 / (l * l) + 0.5 / (l * l * l)).collect();
    assert!((extrapolate_in_log(&logs, &vals) - 3.0).abs() < 1e-10);
}
