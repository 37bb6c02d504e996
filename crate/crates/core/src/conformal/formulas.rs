//! Pointwise algebra of the rescaling in a flat frame (indices are raised with δ).

use crate::error::{AlhError, Result};
use crate::jet::Jet;
use nalgebra::{DMatrix, DVector};

/// φ and its derivatives at a boundary point.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub dim: usize,
    pub phi: f64,
    pub dphi: DVector<f64>,
    pub ddphi: DMatrix<f64>,
    /// R_ACDB of h̊, flattened as ((A·d + C)·d + D)·d + B.
    pub riemann: Vec<f64>,
    /// ∂_C∂_A∂_B u with u = log φ, flattened as (C·d + A)·d + B.
    pub d3u: Option<Vec<f64>>,
}

impl LocalData {
    pub fn from_jet(d: usize, j: &Jet) -> Self {
        LocalData {
            dim: d,
            phi: j.v,
            dphi: DVector::from_fn(d, |a, _| j.g[a]),
            ddphi: DMatrix::from_fn(d, d, |a, b| j.h[a][b]),
            riemann: vec![0.0; d * d * d * d],
            d3u: None,
        }
    }

    fn grad2(&self) -> f64 {
        self.dphi.norm_squared()
    }

    fn lap(&self) -> f64 {
        self.ddphi.trace()
    }

    fn riem(&self, a: usize, c: usize, dd: usize, b: usize) -> f64 {
        let d = self.dim;
        self.riemann[((a * d + c) * d + dd) * d + b]
    }

    /// R_AB = h̊^{CD} R_CADB.
    pub fn ricci(&self) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |a, b| (0..d).map(|c| self.riem(c, a, c, b)).sum())
    }

    /// Du and DDu of u = log φ.
    pub fn u_derivatives(&self) -> (DVector<f64>, DMatrix<f64>) {
        let du = &self.dphi / self.phi;
        let ddu = &self.ddphi / self.phi - &du * du.transpose();
        (du, ddu)
    }
}

/// Pointwise k̄ from the conformal law of the scalar curvature, with
/// R = (n-1)(n-2)k for h̊.
pub fn kbar_at(n: usize, k: f64, l: &LocalData) -> f64 {
    let nf = n as f64;
    let lap_log = l.lap() / l.phi - l.grad2() / (l.phi * l.phi);
    let grad_log2 = l.grad2() / (l.phi * l.phi);
    let r = k * (nf - 1.0) * (nf - 2.0);
    let rbar = (r - 2.0 * (nf - 2.0) * lap_log - (nf - 3.0) * (nf - 2.0) * grad_log2) / (l.phi * l.phi);
    rbar / ((nf - 1.0) * (nf - 2.0))
}

/// k̄ = (3kφ² + |Dφ|² - 2φΔφ)/3φ⁴ for n = 4.
pub fn kbar_closed_form_n4(k: f64, l: &LocalData) -> f64 {
    let p = l.phi;
    (3.0 * k * p * p + l.grad2() - 2.0 * p * l.lap()) / (3.0 * p.powi(4))
}

/// The order-y⁰ tensor that must vanish for h̄ to keep the form
/// (1 - k̄y²/4)²φ²h̊ + O(yⁿ).
pub fn condition_tensor(k: f64, kbar: f64, l: &LocalData) -> DMatrix<f64> {
    let d = l.dim;
    let p = l.phi;
    let id = DMatrix::<f64>::identity(d, d);
    &id * (0.5 * p * p * (k - kbar * p * p) - 0.5 * l.grad2()) - &l.ddphi * p + &l.dphi * l.dphi.transpose() * 2.0
}

/// (φ_1..φ_5, φ_1^A..φ_5^A) at a point, the fourth-order terms in the form
/// valid where the obstruction vanishes. In a flat frame D_C D_B x^A = 0,
/// so φ_4^A has no Christoffel term.
pub fn expansion_at(kbar: f64, l: &LocalData) -> ([f64; 5], [Vec<f64>; 5]) {
    let d = l.dim;
    let p = l.phi;
    let g2 = l.grad2();
    let zero = vec![0.0; d];
    let phi2 = -g2 / (4.0 * p * p);
    let phi4 = -kbar * g2 / 16.0 + g2 * g2 / (16.0 * p.powi(4));
    let phi2a: Vec<f64> = l.dphi.iter().map(|g| -0.5 * g / p).collect();
    let phi4a: Vec<f64> = l.dphi.iter().map(|g| -kbar / 8.0 * p * g).collect();
    ([0.0, phi2, 0.0, phi4, 0.0], [zero.clone(), phi2a, zero.clone(), phi4a, zero])
}

/// φ²μ̄_AB for n = 4 from μ_AB, including the curvature term of h̊.
pub fn mu_bar_n4(k: f64, kbar: f64, l: &LocalData, mu: &DMatrix<f64>) -> DMatrix<f64> {
    let d = l.dim;
    let p = l.phi;
    let id = DMatrix::<f64>::identity(d, d);
    let g = &l.dphi;
    let h = &l.ddphi;
    let g2 = l.grad2();
    let gg = g * g.transpose();
    let hg = h * g;
    let sym = (&hg * g.transpose() + g * hg.transpose()) * 0.5;
    let hgg = g.dot(&hg);
    let mut out = mu.clone();
    out += &id * ((k * k - kbar * kbar * p.powi(4)) / 16.0);
    out -= h * (kbar / 4.0 * p);
    out -= &id * (3.0 / 8.0 * kbar * g2);
    out += &gg * (0.75 * kbar);
    out -= (h * h) / (4.0 * p * p);
    out += sym * (1.5 / p.powi(3));
    out -= &id * (hgg / (4.0 * p.powi(3)));
    out -= h * (g2 / (2.0 * p.powi(3)));
    out -= &gg * (0.75 * g2 / p.powi(4));
    out += &id * (3.0 * g2 * g2 / (16.0 * p.powi(4)));
    for a in 0..d {
        for b in 0..d {
            let mut s = 0.0;
            for c in 0..d {
                for e in 0..d {
                    s += l.riem(a, c, e, b) * g[c] * g[e];
                }
            }
            out[(a, b)] -= s / (4.0 * p * p);
        }
    }
    out
}

/// e^{2u} h̊^{AB}μ̄_AB - μ^A_A written in u = log φ.
pub fn trace_simp3(k: f64, l: &LocalData) -> f64 {
    let (du, ddu) = l.u_derivatives();
    let d = l.dim;
    let g2 = du.norm_squared();
    let lap = ddu.trace();
    let ric = l.ricci() - DMatrix::<f64>::identity(d, d) * (2.0 * k);
    -g2 * lap / 12.0 + lap * lap / 12.0 - ddu.norm_squared() / 4.0
        + du.dot(&(&ddu * &du)) / 4.0
        + du.dot(&(ric * &du)) / 4.0
}

/// C = (1/6)(D_A D_B D^A u) D^B u + (1/12)(R_AB - R h̊_AB/2) D^A u D^B u.
pub fn c_correction(_k: f64, l: &LocalData) -> Result<f64> {
    let d = l.dim;
    let d3 = l.d3u.as_ref().ok_or_else(|| AlhError::Parameter("third derivatives of u required".into()))?;
    let (du, _) = l.u_derivatives();
    let ric = l.ricci();
    let r = ric.trace();
    let mut first = 0.0;
    for b in 0..d {
        // D_A D_B D^A u = Σ_A ∂_A ∂_B ∂_A u in a flat frame
        let s: f64 = (0..d).map(|a| d3[(a * d + b) * d + a]).sum();
        first += s * du[b];
    }
    let einstein = ric - DMatrix::<f64>::identity(d, d) * (r / 2.0);
    Ok(first / 6.0 + du.dot(&(einstein * &du)) / 12.0)
}
