//! Two-dimensional Yamabe problem Δω = 2e^ω on flat tori with excised
//! discs: the explicit neck solution, a composite-grid Newton solver,
//! diagnostics on solved profiles, and the limit profile as the necks
//! degenerate.

mod analysis;
mod grid;
mod hempel;
mod limit;
mod solver;

pub use analysis::{
    area_window, comparison_check, comparison_check_values, gauss_bonnet, gradient_bound, max_principle_violations,
    neck_length, truncation_estimate, AreaWindow, ComparisonReport, NeckLength,
};
pub use grid::{cubic_weights, torus_delta, CompositeGrid, Coupling, GridSpec, NodeKind, PuncturedTorusDomain, Stencil};
pub use hempel::{c1, hempel_bounds, min_density, sup_inverse_density};
pub use limit::{extrapolate_in_log, limit_profile, CuspFit, LimitProfile, CUSP_RADIUS, DEFAULT_I_LADDER};
pub use solver::{solve, solve_with, ConformalSolution, InitialGuess};

use crate::error::{AlhError, Result};
use crate::jet::{Jet, Scalar};
use std::f64::consts::PI;

pub(crate) fn neck_generic<T: Scalar>(i: f64, rho: T) -> T {
    let l2 = 2.0 * i.ln();
    let theta = rho.clone().ln() * (PI / l2);
    // sin θ < 0 on (1/i², 1)
    ((theta.sin() * (-l2 / PI)).ln() + rho.ln()) * -2.0
}

fn check_neck(i: f64, rho: f64) -> Result<()> {
    if !(i > 1.0) {
        return Err(AlhError::Parameter(format!("neck parameter i = {i} must exceed 1")));
    }
    if !(rho > 1.0 / (i * i) && rho < 1.0) {
        return Err(AlhError::Domain(format!("ρ = {rho} outside (1/i², 1)")));
    }
    Ok(())
}

/// ω_{*,i}(ρ) = 2 log(π / (log(i²) |sin(π log ρ / log(i²))| ρ)).
pub fn neck_omega(i: f64, rho: f64) -> Result<f64> {
    check_neck(i, rho)?;
    Ok(neck_generic(i, rho))
}

/// e^{ω_{*,i}}, the conformal factor of the hyperbolic neck.
pub fn neck_factor(i: f64, rho: f64) -> Result<f64> {
    Ok(neck_omega(i, rho)?.exp())
}

/// |Δω_* - 2e^{ω_*}| / (2e^{ω_*}) from exact derivatives.
pub fn neck_pde_residual(i: f64, rho: f64) -> Result<f64> {
    check_neck(i, rho)?;
    let w = neck_generic(i, Jet::var(rho, 0));
    let lap = w.h[0][0] + w.g[0] / rho;
    let e = 2.0 * w.v.exp();
    Ok((lap - e).abs() / e)
}

/// ∂_ρ(ρ e^{ω_*/2}) at ρ = 1/i, which vanishes because the circle is a
/// closed geodesic of the neck.
pub fn neck_minimality(i: f64) -> Result<f64> {
    let rho = 1.0 / i;
    check_neck(i, rho)?;
    let x = Jet::var(rho, 0);
    let f = x.clone() * (neck_generic(i, x) * 0.5).exp();
    Ok(f.g[0])
}

/// Length π²/log i of the neck geodesic in the explicit solution.
pub fn neck_length_bound(i: f64) -> f64 {
    PI * PI / i.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neck_examples() {
        for i in [16.0f64, 64.0, 1000.0] {
            let l = i.ln();
            let f = neck_factor(i, 1.0 / i).unwrap();
            assert!((f / (PI * PI * i * i / (4.0 * l * l)) - 1.0).abs() < 1e-13);
            assert!(neck_minimality(i).unwrap().abs() < 1e-10);
            for k in 1..20 {
                let rho = (1.0 / (i * i)) * (i * i).powf(k as f64 / 20.0);
                assert!(neck_pde_residual(i, rho).unwrap() < 1e-10);
            }
        }
        assert!(neck_factor(16.0, 1.0).is_err());
        assert!(neck_factor(16.0, 1.0 / 256.0).is_err());
    }
}
