use super::grid::{CompositeGrid, Coupling, NodeKind};
use super::solver::{smooth_cutoff, ConformalSolution};
use super::{neck_length_bound, neck_omega};
use crate::error::{AlhError, Result};
use crate::quad::{gauss_legendre_on, pairwise_sum};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Partition of unity between annuli (χ) and the Cartesian patch (1 - χ).
pub(crate) fn annulus_weight(g: &CompositeGrid, rho: f64) -> f64 {
    let gap = g.rho_out - g.rho_c;
    let (r1, r2) = (g.rho_c + 0.1 * gap, g.rho_out - 0.1 * gap);
    smooth_cutoff((rho - r1) / (r2 - r1))
}

/// ∫ F(ω, ρ) dμ_{h0} over every copy of the excised torus; ρ is the
/// distance to the nearest puncture.
pub(crate) fn integrate_field(s: &ConformalSolution, f: impl Fn(f64, f64) -> f64) -> f64 {
    let g = &s.grid;
    let mut terms = Vec::new();
    for c in 0..g.copies {
        for l in 0..g.n {
            for j in 0..g.n {
                if g.kinds[l * g.n + j] != NodeKind::Active {
                    continue;
                }
                let (_, _, rho) = g.domain.nearest(g.node_xy(j, l));
                let w = 1.0 - annulus_weight(g, rho);
                if w > 0.0 {
                    terms.push(g.h * g.h * w * f(s.values[g.cart_node(c, j, l)], rho));
                }
            }
        }
    }
    for (k, an) in g.annuli.iter().enumerate() {
        for a in an.a_min..=g.n_r as i64 {
            let rho = g.rho_of_row(a);
            let chi = annulus_weight(g, rho);
            if chi == 0.0 {
                continue;
            }
            // Trapezoid weight ½ on the mirror-symmetric end row.
            let wa = if an.a_min == 0 && a == 0 { 0.5 } else { 1.0 };
            // dμ = ρ² L dρ̂ dφ
            let cell = wa * chi * g.log_i * g.d_rhohat * g.d_phi * rho * rho;
            for b in 0..g.n_phi as i64 {
                let u = s.ann(k, a, b);
                terms.push(cell * f(u - 2.0 * rho.ln(), rho));
            }
        }
    }
    pairwise_sum(&terms)
}

/// ∫ e^ω dμ_{h0}, the hyperbolic area of the solved surface.
pub fn gauss_bonnet(s: &ConformalSolution) -> f64 {
    integrate_field(s, |w, _| w.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckLength {
    pub length: f64,
    /// π²/log i, the length for the explicit neck.
    pub bound: f64,
}

/// ℓ_i = (1/i)∮ e^{ω/2} dφ on ρ = 1/i, averaged over the necks.
pub fn neck_length(s: &ConformalSolution) -> NeckLength {
    let g = &s.grid;
    let mut total = 0.0;
    for k in 0..g.annuli.len() {
        total += (0..g.n_phi as i64).map(|b| (0.5 * s.ann(k, 0, b)).exp()).sum::<f64>() * g.d_phi;
    }
    NeckLength { length: total / g.annuli.len() as f64, bound: neck_length_bound(g.domain.i) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// max over annulus nodes of ω - ω_{*,i}.
    pub max_excess: f64,
    pub truncation: f64,
    pub pass: bool,
}

/// Local truncation error of the five-point schemes, from fourth
/// differences of the grid function, converted to a pointwise error scale
/// by the linearised zeroth-order coefficient 2e^ω.
pub fn truncation_estimate(g: &CompositeGrid, values: &[f64]) -> f64 {
    let mut m = 0.0f64;
    let n = g.n;
    for c in 0..g.copies {
        for l in 0..n {
            for j in 0..n {
                let node = |dj: i64, dl: i64| {
                    let jj = (j as i64 + dj).rem_euclid(n as i64) as usize;
                    let ll = (l as i64 + dl).rem_euclid(n as i64) as usize;
                    if g.kinds[ll * n + jj] == NodeKind::Hole {
                        None
                    } else {
                        Some(values[g.cart_node(c, jj, ll)])
                    }
                };
                if g.kinds[l * n + j] != NodeKind::Active {
                    continue;
                }
                let fourth = |d: [i64; 2]| -> Option<f64> {
                    let v: Option<Vec<f64>> = (-2..=2).map(|k| node(k * d[0], k * d[1])).collect();
                    let v = v?;
                    Some(v[0] - 4.0 * v[1] + 6.0 * v[2] - 4.0 * v[3] + v[4])
                };
                if let (Some(fx), Some(fy)) = (fourth([1, 0]), fourth([0, 1])) {
                    let tau = (fx + fy) / (12.0 * g.h * g.h);
                    m = m.max(tau.abs() / (2.0 * values[g.cart_node(c, j, l)].exp()));
                }
            }
        }
    }
    let ar = 1.0 / (12.0 * g.log_i * g.log_i * g.d_rhohat * g.d_rhohat);
    let ap = 1.0 / (12.0 * g.d_phi * g.d_phi);
    for an in &g.annuli {
        let u = |a: i64, b: i64| {
            let a = if an.a_min == 0 { a.abs() } else { a };
            values[g.ann_index(an, a, b)]
        };
        let (lo, hi) = if an.a_min == 0 { (0, g.n_r as i64 - 2) } else { (an.a_min + 2, g.n_r as i64 - 2) };
        for a in lo..hi {
            for b in 0..g.n_phi as i64 {
                let fr = u(a - 2, b) - 4.0 * u(a - 1, b) + 6.0 * u(a, b) - 4.0 * u(a + 1, b) + u(a + 2, b);
                let fp = u(a, b - 2) - 4.0 * u(a, b - 1) + 6.0 * u(a, b) - 4.0 * u(a, b + 1) + u(a, b + 2);
                let tau = ar * fr + ap * fp;
                m = m.max(tau.abs() / (2.0 * u(a, b).exp()));
            }
        }
    }
    m
}

/// Checks ω ≤ ω_{*,i} on the annulus nodes of a raw value vector.
pub fn comparison_check_values(g: &CompositeGrid, values: &[f64]) -> ComparisonReport {
    let i = g.domain.i;
    let mut excess = f64::NEG_INFINITY;
    for an in &g.annuli {
        let lo = if an.a_min == 0 { 0 } else { an.a_min };
        for a in lo..=g.n_r as i64 {
            let rho = g.rho_of_row(a);
            let Ok(ws) = neck_omega(i, rho) else { continue };
            let us = ws + 2.0 * rho.ln();
            for b in 0..g.n_phi as i64 {
                excess = excess.max(values[g.ann_index(an, a, b)] - us);
            }
        }
    }
    let truncation = truncation_estimate(g, values);
    ComparisonReport { max_excess: excess, truncation, pass: excess <= 5.0 * truncation }
}

pub fn comparison_check(s: &ConformalSolution) -> ComparisonReport {
    comparison_check_values(&s.grid, &s.values)
}

/// Number of active nodes where the grid function is a (non-strict) local
/// maximum; zero for a subsolution of Δω = 2e^ω > 0.
pub fn max_principle_violations(s: &ConformalSolution) -> usize {
    let g = &s.grid;
    let n = g.n;
    let mut count = 0;
    for c in 0..g.copies {
        for l in 0..n {
            for j in 0..n {
                if g.kinds[l * n + j] != NodeKind::Active {
                    continue;
                }
                let v = s.values[g.cart_node(c, j, l)];
                let nb = [((j + 1) % n, l), ((j + n - 1) % n, l), (j, (l + 1) % n), (j, (l + n - 1) % n)];
                if nb.iter().all(|&(a, b)| s.values[g.cart_node(c, a, b)] <= v) {
                    count += 1;
                }
            }
        }
    }
    for (k, an) in g.annuli.iter().enumerate() {
        let lo = if an.a_min == 0 { 0 } else { an.a_min + 1 };
        for a in lo..g.n_r as i64 {
            for b in 0..g.n_phi as i64 {
                let v = s.ann(k, a, b);
                let below = if an.a_min == 0 && a == 0 { 1 } else { a - 1 };
                let nb = [s.ann(k, a + 1, b), s.ann(k, below, b), s.ann(k, a, b + 1), s.ann(k, a, b - 1)];
                if nb.iter().all(|&x| x <= v) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Smallest C with |∂e^{-ω/2}| ≤ C ρ^{-1} e^{-ω/2} on the annulus nodes,
/// i.e. max ρ|∇ω|/2.
pub fn gradient_bound(s: &ConformalSolution) -> f64 {
    let g = &s.grid;
    let mut c = 0.0f64;
    for (k, an) in g.annuli.iter().enumerate() {
        let lo = if an.a_min == 0 { 0 } else { an.a_min + 1 };
        for a in lo..g.n_r as i64 {
            for b in 0..g.n_phi as i64 {
                let below = if an.a_min == 0 && a == 0 { 1 } else { a - 1 };
                let ur = (s.ann(k, a + 1, b) - s.ann(k, below, b)) / (2.0 * g.d_rhohat);
                let up = (s.ann(k, a, b + 1) - s.ann(k, a, b - 1)) / (2.0 * g.d_phi);
                // ρ∂_ρ ω = ∂_s u - 2 with s = log ρ = L(ρ̂ - 1)
                let ws = ur / g.log_i - 2.0;
                c = c.max(0.5 * ws.hypot(up));
            }
        }
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaWindow {
    /// ∫_{Γ(1/i, ε/2)} e^ω, averaged per neck.
    pub annulus: f64,
    /// Bound -2π² cot(π log(ε/2) / log i²) / log i² from ω_{*,i}.
    pub annulus_bound: f64,
    /// ∫ e^ω outside the discs D(ε/2), per puncture.
    pub outer: f64,
    pub total: f64,
    /// π ≤ outer < 2π.
    pub pass: bool,
}

/// Area split at the circle ρ = ε/2 around the necks.
pub fn area_window(s: &ConformalSolution, eps: f64) -> Result<AreaWindow> {
    let g = &s.grid;
    if g.spec.coupling != Coupling::Neumann {
        return Err(AlhError::Feature("area window is defined for the Neumann problem".into()));
    }
    let i = g.domain.i;
    let r = 0.5 * eps;
    if !(r > 1.0 / i && r < g.rho_out) {
        return Err(AlhError::Domain(format!("ε/2 = {r} must lie in (1/i, {})", g.rho_out)));
    }
    let top = g.rhohat_of(r);
    let (x, w) = gauss_legendre_on(6, 0.0, 1.0);
    let mut annulus = 0.0;
    for k in 0..g.annuli.len() {
        // Angular integral of e^u on each row, then cubic interpolation in ρ̂.
        let prof: Vec<f64> = (0..=g.n_r as i64)
            .map(|a| (0..g.n_phi as i64).map(|b| s.ann(k, a, b).exp()).sum::<f64>() * g.d_phi)
            .collect();
        let at = |t: f64| {
            let sc = t / g.d_rhohat;
            let a0 = sc.floor() as i64;
            let cw = super::grid::cubic_weights(sc - a0 as f64);
            (0..4).map(|m| cw[m] * prof[(a0 - 1 + m as i64).unsigned_abs() as usize]).sum::<f64>()
        };
        let cells = (top / g.d_rhohat).ceil() as usize;
        let mut acc = 0.0;
        for c in 0..cells {
            let lo = c as f64 * g.d_rhohat;
            let hi = (lo + g.d_rhohat).min(top);
            for (xq, wq) in x.iter().zip(&w) {
                acc += wq * (hi - lo) * at(lo + xq * (hi - lo));
            }
        }
        annulus += g.log_i * acc;
    }
    let n = g.annuli.len() as f64;
    let total = gauss_bonnet(s);
    let l2 = 2.0 * i.ln();
    let annulus_bound = -2.0 * PI * PI / (l2 * (PI * r.ln() / l2).tan());
    let outer = (total - annulus) / n;
    Ok(AreaWindow { annulus: annulus / n, annulus_bound, outer, total, pass: outer >= PI && outer < 2.0 * PI })
}
