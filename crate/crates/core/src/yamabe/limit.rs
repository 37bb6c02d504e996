//! Limit of the Neumann solutions as i → ∞: the complete hyperbolic metric
//! with a cusp at the puncture.

use super::analysis::annulus_weight;
use super::grid::{GridSpec, NodeKind, PuncturedTorusDomain};
use super::hempel::hempel_bounds;
use super::solver::{solve_with, ConformalSolution, InitialGuess};
use crate::error::{AlhError, Result};
use crate::quad::{gauss_legendre_on, pairwise_sum};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default ladder: log i doubles from log 256.
pub const DEFAULT_I_LADDER: [f64; 4] = [256.0, 65536.0, 4294967296.0, 1.8446744073709552e19];

/// Inner edge of the resolved cusp region.
pub const CUSP_RADIUS: f64 = 0.02;

/// Extrapolates ω(L) = ω_∞ + Σ_k a_k L^{-(k+2)} to L = ∞ through all levels.
pub fn extrapolate_in_log(logs: &[f64], values: &[f64]) -> f64 {
    let m = logs.len();
    if m == 1 {
        return values[0];
    }
    let a = DMatrix::from_fn(m, m, |r, c| if c == 0 { 1.0 } else { logs[r].powi(-(c as i32 + 1)) });
    let b = DVector::from_column_slice(values);
    a.lu().solve(&b).map(|x| x[0]).unwrap_or(values[m - 1])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CuspFit {
    /// Rings ρ with the angular mean of e^{-ω_∞/2}/ρ - |log ρ|.
    pub rho: Vec<f64>,
    pub shift: Vec<f64>,
    /// Fitted c in e^{ω_∞/2} ≈ 1/(ρ(|log ρ| + c)) at the innermost ring.
    pub c: f64,
    /// max |ω_∞ + 2 log(-ρ log ρ)| over the resolved rings.
    pub bounded_by: f64,
}

#[derive(Clone, Debug)]
pub struct LimitProfile {
    pub ladder: Vec<f64>,
    pub solutions: Vec<ConformalSolution>,
    /// Extrapolated ω_∞ on the Cartesian nodes (NaN on holes).
    pub cart: Vec<f64>,
    /// Largest change between the last two ladder levels at Cartesian nodes.
    pub last_step: f64,
    /// Spread between extrapolants with and without the coarsest level.
    pub error: f64,
    pub warning: Option<String>,
    pub cusp: CuspFit,
    /// ∫ e^{ω_∞} dμ_{h0} (2π per puncture for a cusped torus).
    pub area: f64,
    /// ∫ e^{-ω_∞/2} dμ_{h0}.
    pub inverse_density_integral: f64,
    /// min e^{ω_∞/2} over the Cartesian nodes.
    pub min_density: f64,
}

impl LimitProfile {
    /// ω_∞ at an arbitrary point outside the excised discs of the coarsest level.
    pub fn omega(&self, x: [f64; 2]) -> Result<f64> {
        let logs: Vec<f64> = self.ladder.iter().map(|i| i.ln()).collect();
        let v: Result<Vec<f64>> = self.solutions.iter().map(|s| s.omega_at(x)).collect();
        Ok(extrapolate_in_log(&logs, &v?))
    }

    /// Fraction of `count` quasi-random samples of the fundamental square
    /// (outside the cusp radius) where the Hempel bracket holds, within `tol`
    /// relative slack.
    pub fn hempel_check(&self, count: usize, tol: f64) -> Result<(usize, usize)> {
        let p = self.solutions[0].grid.domain.punctures[0];
        let mut ok = 0;
        let mut used = 0;
        let mut k = 1;
        while used < count {
            let z = [halton(k, 2) - 0.5, halton(k, 3) - 0.5];
            k += 1;
            let r = z[0].hypot(z[1]);
            if r < CUSP_RADIUS {
                continue;
            }
            used += 1;
            let w = self.omega([p[0] + z[0], p[1] + z[1]])?;
            let d = (0.5 * w).exp();
            let (lo, hi) = hempel_bounds(r)?;
            if d >= lo * (1.0 - tol) && d <= hi * (1.0 + tol) {
                ok += 1;
            }
        }
        Ok((ok, used))
    }
}

fn halton(mut k: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

/// Solves the Neumann problem along the ladder and extrapolates pointwise.
pub fn limit_profile(domain: &PuncturedTorusDomain, ladder: &[f64], n: usize) -> Result<LimitProfile> {
    if domain.punctures.len() != 1 {
        return Err(AlhError::Feature("limit profile is implemented for one puncture".into()));
    }
    if ladder.len() < 2 || ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AlhError::Parameter("ladder must be increasing with at least two levels".into()));
    }
    let solutions: Vec<ConformalSolution> = ladder
        .iter()
        .map(|&i| solve_with(&PuncturedTorusDomain::new(domain.punctures.clone(), i)?, GridSpec::new(n), InitialGuess::Zero))
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = ladder.iter().map(|i| i.ln()).collect();
    let g = solutions[0].grid.clone();
    let m = ladder.len();

    let mut cart = vec![f64::NAN; g.n * g.n];
    let (mut last_step, mut prev_step, mut error) = (0.0f64, 0.0f64, 0.0f64);
    for (node, kind) in g.kinds.iter().enumerate() {
        if *kind != NodeKind::Active {
            continue;
        }
        let k = g.cart_index[node];
        let v: Vec<f64> = solutions.iter().map(|s| s.values[k]).collect();
        cart[node] = extrapolate_in_log(&logs, &v);
        last_step = last_step.max((v[m - 1] - v[m - 2]).abs());
        if m >= 3 {
            prev_step = prev_step.max((v[m - 2] - v[m - 3]).abs());
            error = error.max((cart[node] - extrapolate_in_log(&logs[1..], &v[1..])).abs());
        } else {
            error = error.max((v[1] - v[0]).abs());
        }
    }
    let warning = (m >= 3 && last_step > prev_step)
        .then(|| format!("ladder not Cauchy: last step {last_step:e} exceeds previous {prev_step:e}"));

    // Cartesian part of the integrals, weighted by 1 - χ.
    let mut area_terms = Vec::new();
    let mut inv_terms = Vec::new();
    let mut min_d = f64::INFINITY;
    for l in 0..g.n {
        for j in 0..g.n {
            let w = cart[l * g.n + j];
            if w.is_nan() {
                continue;
            }
            min_d = min_d.min((0.5 * w).exp());
            let (_, _, rho) = g.domain.nearest(g.node_xy(j, l));
            let cw = 1.0 - annulus_weight(&g, rho);
            if cw > 0.0 {
                area_terms.push(g.h * g.h * cw * w.exp());
                inv_terms.push(g.h * g.h * cw * (-0.5 * w).exp());
            }
        }
    }

    // Resolved cusp region: Gauss-Legendre in s = log ρ, trapezoid in φ.
    let p = g.domain.punctures[0];
    let panels = 24;
    let (s0, s1) = (CUSP_RADIUS.ln(), g.rho_out.ln());
    let n_phi = g.n_phi;
    let mut rings = Vec::new();
    for q in 0..panels {
        let a = s0 + (s1 - s0) * q as f64 / panels as f64;
        let b = s0 + (s1 - s0) * (q + 1) as f64 / panels as f64;
        let (x, w) = gauss_legendre_on(8, a, b);
        rings.extend(x.into_iter().zip(w));
    }
    let ring_values: Vec<Result<(f64, f64, Vec<f64>)>> = rings
        .par_iter()
        .map(|&(s, ws)| {
            let rho = s.exp();
            let om: Result<Vec<f64>> = (0..n_phi)
                .map(|b| {
                    let phi = 2.0 * PI * b as f64 / n_phi as f64;
                    let x = [p[0] + rho * phi.cos(), p[1] + rho * phi.sin()];
                    let v: Result<Vec<f64>> = solutions.iter().map(|s| s.omega_at(x)).collect();
                    Ok(extrapolate_in_log(&logs, &v?))
                })
                .collect();
            Ok((rho, ws, om?))
        })
        .collect();
    let dphi = 2.0 * PI / n_phi as f64;
    let mut cusp = CuspFit { rho: vec![], shift: vec![], c: 0.0, bounded_by: 0.0 };
    for rv in ring_values {
        let (rho, ws, om) = rv?;
        let chi = annulus_weight(&g, rho);
        // dμ = ρ² ds dφ
        let cell = ws * dphi * rho * rho * chi;
        area_terms.push(cell * om.iter().map(|w| w.exp()).sum::<f64>());
        inv_terms.push(cell * om.iter().map(|w| (-0.5 * w).exp()).sum::<f64>());
        let mean_inv = om.iter().map(|w| (-0.5 * w).exp()).sum::<f64>() / n_phi as f64;
        cusp.rho.push(rho);
        cusp.shift.push(mean_inv / rho - rho.ln().abs());
        for w in &om {
            cusp.bounded_by = cusp.bounded_by.max((w + 2.0 * (-rho * rho.ln()).ln()).abs());
        }
    }
    cusp.c = cusp.shift[0];
    // Model e^{ω_∞/2} = 1/(ρ(|log ρ| + c)) inside the cusp radius.
    let lr = CUSP_RADIUS.ln().abs();
    area_terms.push(2.0 * PI / (lr + cusp.c));
    inv_terms.push(2.0 * PI * CUSP_RADIUS.powi(3) / 3.0 * (lr + 1.0 / 3.0 + cusp.c));

    Ok(LimitProfile {
        ladder: ladder.to_vec(),
        solutions,
        cart,
        last_step,
        error,
        warning,
        cusp,
        area: pairwise_sum(&area_terms),
        inverse_density_integral: pairwise_sum(&inv_terms),
        min_density: min_d,
    })
}
