//! Numerical construction of the geodesic defining function y and the new
//! boundary coordinates x̄^A for g = x⁻²(dx² + h_AB(x) dx^A dx^B).
//!
//! With y = x e^W the condition |d log y|_g = 1 becomes the first-order PDE
//! 2∂_x W + x((∂_x W)² + h^{AB}∂_A W ∂_B W) = 0, W|_{x=0} = log φ, for which
//! x = 0 is non-characteristic. Its characteristics are the integral curves
//! of ∇y, so x̄^A is constant along each of them and equals its foot point.

use super::formulas::{expansion_at, kbar_at};
use super::{r_from_x, BoundaryConformalData};
use crate::error::{AlhError, Result};
use crate::jet::Jet;
use nalgebra::{DMatrix, DVector};
use ode_solvers::{Dopri5, OutputType, System};
use rayon::prelude::*;
use std::sync::Arc;

/// μ_AB(x^C) as row-major d×d jets.
pub type TensorField = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// Fefferman-Graham data h_AB(x) = (1 - kx²/4)² δ_AB + xⁿ μ_AB over a flat boundary.
#[derive(Clone)]
pub struct FGMetric {
    pub n: usize,
    pub k: f64,
    pub mu: Option<TensorField>,
}

impl std::fmt::Debug for FGMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FGMetric {{ n: {}, k: {}, mu: {} }}", self.n, self.k, if self.mu.is_some() { "Some(..)" } else { "None" })
    }
}

impl FGMetric {
    pub fn hyperbolic(n: usize, k: f64) -> Self {
        FGMetric { n, k, mu: None }
    }

    /// h^{AB}, ∂_x h^{AB} and ∂_C h^{AB} at (x, x^A).
    fn inverse_with_derivatives(&self, x: f64, xa: &[f64]) -> Option<(DMatrix<f64>, DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let d = xa.len();
        let s = 1.0 - self.k * x * x / 4.0;
        let id = DMatrix::<f64>::identity(d, d);
        let mut h = &id * (s * s);
        let mut hx = &id * (-self.k * x * s);
        let mut hc = vec![DMatrix::<f64>::zeros(d, d); d];
        if let Some(mu) = &self.mu {
            let m = mu(&Jet::point(xa));
            let xn = x.powi(self.n as i32);
            let dxn = self.n as f64 * x.powi(self.n as i32 - 1);
            for a in 0..d {
                for b in 0..d {
                    let j = &m[a * d + b];
                    h[(a, b)] += xn * j.v;
                    hx[(a, b)] += dxn * j.v;
                    for (c, hcc) in hc.iter_mut().enumerate() {
                        hcc[(a, b)] = xn * j.g[c];
                    }
                }
            }
        }
        let inv = h.try_inverse()?;
        let dinv_x = -(&inv * hx * &inv);
        let dinv_c = hc.iter().map(|m| -(&inv * m * &inv)).collect();
        Some((inv, dinv_x, dinv_c))
    }
}

struct Characteristics<'a> {
    g: &'a FGMetric,
    d: usize,
}

// state: [x^A (d), W, p_x, p_A (d)]; independent variable x
impl System<f64, DVector<f64>> for Characteristics<'_> {
    fn system(&self, x: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let d = self.d;
        let xa: Vec<f64> = (0..d).map(|a| y[a]).collect();
        let px = y[d + 1];
        let p = DVector::from_fn(d, |a, _| y[d + 2 + a]);
        let Some((inv, dinv_x, dinv_c)) = self.g.inverse_with_derivatives(x, &xa) else {
            dy.fill(f64::NAN);
            return;
        };
        let hp = &inv * &p;
        let den = 2.0 + 2.0 * x * px;
        for a in 0..d {
            dy[a] = 2.0 * x * hp[a] / den;
        }
        dy[d] = (px * den + 2.0 * x * p.dot(&hp)) / den;
        dy[d + 1] = -(px * px + p.dot(&hp) + x * p.dot(&(&dinv_x * &p))) / den;
        for c in 0..d {
            dy[d + 2 + c] = -x * p.dot(&(&dinv_c[c] * &p)) / den;
        }
    }
}

#[derive(Clone, Debug)]
pub struct GaugeSample {
    pub x: f64,
    /// Original boundary coordinates of the point.
    pub xa: Vec<f64>,
    pub y: f64,
}

/// One characteristic: all its points share x̄^A = `xbar`.
#[derive(Clone, Debug)]
pub struct GaugeRay {
    pub xbar: Vec<f64>,
    pub samples: Vec<GaugeSample>,
}

/// Integrates the gauge conditions from each foot point in `starts` and
/// samples (x^A, y) at every x of the increasing `x_ladder`.
pub fn geodesic_gauge_shoot(
    g: &FGMetric,
    data: &BoundaryConformalData,
    starts: &[Vec<f64>],
    x_ladder: &[f64],
) -> Result<Vec<GaugeRay>> {
    let d = data.dim();
    if g.n != d + 1 {
        return Err(AlhError::Dimension { expected: d + 1, got: g.n });
    }
    if g.k != data.k {
        return Err(AlhError::Parameter(format!("metric k = {} differs from boundary k = {}", g.k, data.k)));
    }
    if x_ladder.is_empty() || !(x_ladder[0] > 0.0) || x_ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AlhError::Parameter("x ladder must be positive and increasing".into()));
    }
    starts
        .par_iter()
        .map(|s| {
            if s.len() != d {
                return Err(AlhError::Dimension { expected: d, got: s.len() });
            }
            let j = data.phi.jet(s)?;
            let mut state = DVector::zeros(2 * d + 2);
            for a in 0..d {
                state[a] = s[a];
                state[d + 2 + a] = j.g[a] / j.v;
            }
            state[d] = j.v.ln();
            let mut x0 = 0.0;
            let mut samples = Vec::with_capacity(x_ladder.len());
            for &x1 in x_ladder {
                let sys = Characteristics { g, d };
                let mut solver = Dopri5::new(sys, x0, x1, x1 - x0, state.clone(), 1e-12, 1e-14);
                solver.set_output(OutputType::Sparse);
                solver.integrate().map_err(|e| AlhError::Integration(format!("{e:?} from {s:?} at x = {x0}")))?;
                let (xs, ys) = (solver.x_out(), solver.y_out());
                match (xs.last(), ys.last()) {
                    (Some(&xe), Some(ye)) if (xe - x1).abs() <= 1e-12 * x1.max(1.0) && ye.iter().all(|v| v.is_finite()) => {
                        state = ye.clone();
                    }
                    _ => return Err(AlhError::Integration(format!("characteristic from {s:?} stopped before x = {x1}"))),
                }
                samples.push(GaugeSample { x: x1, xa: (0..d).map(|a| state[a]).collect(), y: x1 * state[d].exp() });
                x0 = x1;
            }
            Ok(GaugeRay { xbar: s.clone(), samples })
        })
        .collect()
}

/// Shooting versus the large-r expansions of x̄^A and r̄.
#[derive(Clone, Debug)]
pub struct GaugeExpansionReport {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    /// max over rays of |x̄ - x - D^Aψ/(2ψr²)|.
    pub xbar_remainder: Vec<f64>,
    /// max over rays of |r̄/(ψr) - 1 - c₂/r²|.
    pub rbar_remainder: Vec<f64>,
    /// Fitted decay exponents of the remainders in r.
    pub xbar_order: f64,
    pub rbar_order: f64,
    /// max over the ladder of remainder · r⁴.
    pub xbar_scaled: f64,
    pub rbar_scaled: f64,
    /// max |fit - formula| for φ₂, φ₄, φ₂^A, φ₄^A (only when μ = 0).
    pub coefficient_errors: Option<[f64; 4]>,
}

fn loglog_order(r: &[f64], rem: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        r.iter().zip(rem).filter(|(_, e)| **e > 1e-13).map(|(r, e)| (r.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -num / den
}

/// Intercept of a least-squares polynomial in x² through (x, v).
fn intercept_in_x2(x: &[f64], v: &[f64], degree: usize) -> f64 {
    let cols = degree + 1;
    let a = DMatrix::from_fn(x.len(), cols, |i, c| x[i].powi(2 * c as i32));
    let b = DVector::from_column_slice(v);
    a.svd(true, true).solve(&b, 1e-15).map(|s| s[0]).unwrap_or(f64::NAN)
}

pub fn gauge_expansion_check(
    g: &FGMetric,
    data: &BoundaryConformalData,
    starts: &[Vec<f64>],
    x_ladder: &[f64],
) -> Result<GaugeExpansionReport> {
    let rays = geodesic_gauge_shoot(g, data, starts, x_ladder)?;
    let n = g.n;
    let d = data.dim();
    let nf = n as f64;
    let k = data.k;
    let r: Vec<f64> = x_ladder.iter().map(|&x| r_from_x(x, k)).collect::<Result<_>>()?;
    let mut xrem = vec![0.0f64; x_ladder.len()];
    let mut rrem = vec![0.0f64; x_ladder.len()];
    let mut errs = [0.0f64; 4];
    for ray in &rays {
        let foot = data.local(&ray.xbar)?;
        let kb = kbar_at(n, k, &foot);
        let (c_foot, ca_foot) = expansion_at(kb, &foot);
        let (mut q0, mut q1) = (Vec::new(), Vec::new());
        let (mut qa, mut qb): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (Vec::new(), Vec::new());
        for (j, s) in ray.samples.iter().enumerate() {
            let l = data.local(&s.xa)?;
            let (du, ddu) = l.u_derivatives();
            let psi = 1.0 / l.phi;
            for a in 0..d {
                // D^Aψ/ψ = -D^A u
                let pred = s.xa[a] - du[a] / (2.0 * r[j] * r[j]);
                xrem[j] = xrem[j].max((ray.xbar[a] - pred).abs());
            }
            let c2 = (ddu.trace() + (nf - 2.0) * du.norm_squared()) / (2.0 * (nf - 1.0));
            let rbar = 1.0 / s.y - kb * s.y / 4.0;
            rrem[j] = rrem[j].max((rbar / (psi * r[j]) - 1.0 - c2 / (r[j] * r[j])).abs());

            let (c, ca) = expansion_at(kb, &l);
            let x = s.x;
            let ratio = s.y / (l.phi * x) - 1.0;
            q0.push(ratio / (x * x));
            q1.push((ratio - c[1] * x * x) / x.powi(4));
            let da: Vec<f64> = (0..d).map(|a| ray.xbar[a] - s.xa[a]).collect();
            qa.push(da.clone());
            qb.push(da.iter().enumerate().map(|(a, v)| (v - ca[1][a] * x * x) / x.powi(4)).collect::<Vec<f64>>());
        }
        if g.mu.is_none() {
            let xs = x_ladder;
            let deg = 3.min(xs.len().saturating_sub(1));
            errs[0] = errs[0].max((intercept_in_x2(xs, &q0, deg) - c_foot[1]).abs());
            errs[1] = errs[1].max((intercept_in_x2(xs, &q1, deg) - c_foot[3]).abs());
            for a in 0..d {
                let va: Vec<f64> = qa.iter().zip(xs).map(|(v, x)| v[a] / (x * x)).collect();
                let vb: Vec<f64> = qb.iter().map(|v| v[a]).collect();
                errs[2] = errs[2].max((intercept_in_x2(xs, &va, deg) - ca_foot[1][a]).abs());
                errs[3] = errs[3].max((intercept_in_x2(xs, &vb, deg) - ca_foot[3][a]).abs());
            }
        }
    }
    let xbar_scaled = xrem.iter().zip(&r).map(|(e, r)| e * r.powi(4)).fold(0.0, f64::max);
    let rbar_scaled = rrem.iter().zip(&r).map(|(e, r)| e * r.powi(4)).fold(0.0, f64::max);
    Ok(GaugeExpansionReport {
        xbar_order: loglog_order(&r, &xrem),
        rbar_order: loglog_order(&r, &rrem),
        x: x_ladder.to_vec(),
        r,
        xbar_remainder: xrem,
        rbar_remainder: rrem,
        xbar_scaled,
        rbar_scaled,
        coefficient_errors: g.mu.is_none().then_some(errs),
    })
}

/// Geometric x ladder from 0.2 down by factors of √2. Larger x lets the
/// truncated fit in x² miss by 1e-4 for factors with |Dφ| of order one.
pub fn default_x_ladder() -> Vec<f64> {
    let mut v: Vec<f64> = (0..10).map(|j| 0.2 * 2f64.powf(-(j as f64) / 2.0)).collect();
    v.reverse();
    v
}
