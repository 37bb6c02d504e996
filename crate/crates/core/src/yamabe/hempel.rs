//! Hempel-type bounds for the hyperbolic density of the once-punctured
//! square torus, and the constants derived from Γ(1/4).

use crate::error::{AlhError, Result};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// C₁ = Γ(1/4)⁴ / (4π²) ≈ 4.37688.
pub fn c1() -> f64 {
    gamma(0.25).powi(4) / (4.0 * PI * PI)
}

/// Minimum of 2ρ_{X₀} on the square torus, 4π^{3/2}/Γ(1/4)² ≈ 1.695,
/// attained at the half-period (1+i)/2.
pub fn min_density() -> f64 {
    4.0 * PI.powf(1.5) / gamma(0.25).powi(2)
}

/// Upper bound Γ(1/4)²/(4π^{3/2}) ≈ 0.59 for e^{-ω_∞/2}.
pub fn sup_inverse_density() -> f64 {
    1.0 / min_density()
}

/// (lower, upper) = (1/(|z|(|log|z|| + C₁)), 1/(|z||log|z||)), bracketing
/// e^{ω_∞/2} at flat distance |z| from the puncture.
pub fn hempel_bounds(modulus: f64) -> Result<(f64, f64)> {
    if !(modulus > 0.0 && modulus < 1.0) {
        return Err(AlhError::Domain(format!("|z| = {modulus} outside (0, 1)")));
    }
    let l = modulus.ln().abs();
    Ok((1.0 / (modulus * (l + c1())), 1.0 / (modulus * l)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((c1() - 4.37688).abs() < 1e-4);
        assert!((min_density() - 1.695).abs() < 1e-3);
        assert!((sup_inverse_density() - 0.59).abs() < 1e-2);
        let (lo, hi) = hempel_bounds(0.3).unwrap();
        assert!(lo < hi);
        assert!(hempel_bounds(1.0).is_err() && hempel_bounds(0.0).is_err());
    }
}
