//! Hyperbolic mass: the 𝕌-flux integral, the frame formula, the
//! mass-aspect formula and the traceless-Ricci form, with radial-ladder
//! extrapolation and the spherical energy-momentum addition rule.
//!
//! All four evaluators are normalised to the same constant: the
//! Horowitz-Myers soliton with unit boundary area has mass -2(n-2) m_c in
//! every one of them. The raw 𝕌-flux, frame and aspect integrals give
//! -2 m_c there and are multiplied by (n-2); the raw Ricci form gives
//! -(n-2) m_c and is multiplied by 2. In dimension two the raw values are
//! returned.

mod extrap;
mod lorentz;

pub use extrap::{extrapolate_limit, Extrapolation};
pub use lorentz::{lorentz_add, lorentz_boost, lorentz_defect, minkowski_square, EnergyMomentum};

use crate::error::{AlhError, Result};
use crate::jet::Jet;
use crate::kids::{kid_residual_raw, PotentialValue, StaticPotential};
use crate::metrics::{
    bk_background, bk_spatial, frame_deviation_jet, hm_background, hm_spatial, BKParams, Boundary, ChartMetric,
    HMParams, PointGeometry, QuadNode,
};
use crate::quad::pairwise_sum;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default radius ladder.
pub const DEFAULT_LADDER: [f64; 4] = [8.0, 16.0, 32.0, 64.0];

/// Multiplier applied to the raw 𝕌-flux, frame and aspect integrals.
pub fn flux_normalization(n: usize) -> f64 {
    if n > 2 {
        (n - 2) as f64
    } else {
        1.0
    }
}

/// Multiplier applied to the raw traceless-Ricci integral.
pub fn ricci_normalization(n: usize) -> f64 {
    if n > 2 {
        2.0
    } else {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MassFormula {
    UFlux,
    Frame,
    Aspect,
    Ricci,
}

impl MassFormula {
    pub const ALL: [MassFormula; 4] = [MassFormula::UFlux, MassFormula::Frame, MassFormula::Aspect, MassFormula::Ricci];
}

/// Anything that provides V with exact first and second derivatives.
pub trait PotentialField: Send + Sync {
    fn evaluate(&self, x: &[f64]) -> PotentialValue;
}

impl PotentialField for StaticPotential {
    fn evaluate(&self, x: &[f64]) -> PotentialValue {
        StaticPotential::evaluate(self, x)
    }
}

/// Σ c_a V_a.
pub struct LinearCombination(pub Vec<(f64, StaticPotential)>);

impl PotentialField for LinearCombination {
    fn evaluate(&self, x: &[f64]) -> PotentialValue {
        let n = x.len();
        let mut out = PotentialValue { v: 0.0, grad: vec![0.0; n], hess: DMatrix::zeros(n, n) };
        for (c, p) in &self.0 {
            let e = p.evaluate(x);
            out.v += c * e.v;
            for a in 0..n {
                out.grad[a] += c * e.grad[a];
            }
            out.hess += e.hess * *c;
        }
        out
    }
}

/// A metric g, its background b on the same chart, and the boundary
/// manifold swept by the non-radial coordinates.
#[derive(Clone, Debug)]
pub struct MassSetup {
    pub g: ChartMetric,
    pub b: ChartMetric,
    pub boundary: Boundary,
    pub k: i32,
    /// Quadrature nodes per boundary direction.
    pub res: usize,
}

fn default_res(b: &Boundary) -> usize {
    match b {
        Boundary::FlatTorus { .. } => 4,
        _ => 12,
    }
}

impl MassSetup {
    pub fn new(g: ChartMetric, b: ChartMetric, boundary: Boundary, k: i32) -> Result<Self> {
        if g.dim() != b.dim() || boundary.dim() + 1 != g.dim() {
            return Err(AlhError::Dimension { expected: g.dim(), got: boundary.dim() + 1 });
        }
        if b.radial.is_none() {
            return Err(AlhError::Feature("background needs a radial coordinate".into()));
        }
        let res = default_res(&boundary);
        Ok(MassSetup { g, b, boundary, k, res })
    }

    pub fn hm(p: &HMParams) -> Self {
        Self::new(hm_spatial(p), hm_background(p), p.boundary(), 0).unwrap()
    }

    pub fn bk(p: &BKParams) -> Self {
        Self::new(bk_spatial(p), bk_background(p), p.boundary.clone(), p.k).unwrap()
    }

    /// g replaced by its own background.
    pub fn trivial(&self) -> Self {
        MassSetup { g: self.b.clone(), ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.g.dim()
    }

    fn radial(&self) -> usize {
        self.b.radial.unwrap()
    }

    pub fn point(&self, r: f64, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        x.insert(self.radial(), r);
        x
    }

    fn nodes(&self) -> Vec<QuadNode> {
        self.boundary.quadrature(self.res)
    }

    /// Σ w·f over boundary nodes at radius R (coordinate weights).
    fn sum_nodes<F>(&self, r: f64, f: F) -> Result<f64>
    where
        F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
    {
        let nodes = self.nodes();
        let terms: Result<Vec<f64>> = nodes.par_iter().map(|q| Ok(q.w * f(&self.point(r, &q.y), &q.y)?)).collect();
        Ok(pairwise_sum(&terms?))
    }

    /// The background static potential √(r² + k) (r when k = 0).
    pub fn background_potential(&self) -> StaticPotential {
        let n = self.n();
        let params = BKParams {
            n,
            k: self.k,
            m_c: 0.0,
            boundary: Boundary::flat_torus(vec![1.0; n - 1]),
        };
        StaticPotential::BKZeroMass { params, c_tilde: 1.0, c_hat: 0.0, omega: vec![0.0; n - 1] }
    }
}

fn jets_of(m: &ChartMetric, x: &[f64]) -> Result<Vec<Jet>> {
    m.raw_jet(&Jet::point(x)).ok_or_else(|| AlhError::Feature("mass integrands need closed-form metrics".into()))
}

/// Radial component of the 𝕌 density (includes √det g) at x.
pub fn u_flux_density(s: &MassSetup, v: &dyn PotentialField, x: &[f64]) -> Result<f64> {
    s.g.check(x)?;
    s.b.check(x)?;
    let n = s.n();
    let i = s.radial();
    let gj = jets_of(&s.g, x)?;
    let g = DMatrix::from_fn(n, n, |a, c| gj[a * n + c].v);
    let gi = g.clone().try_inverse().ok_or_else(|| AlhError::Singularity(format!("{x:?}")))?;
    let bgeo = PointGeometry::at(&s.b, x)?;
    // D̊_j g_kl
    let dg = |j: usize, k: usize, l: usize| {
        let mut v = gj[k * n + l].g[j];
        for p in 0..n {
            v -= bgeo.gamma.get(p, j, k) * g[(p, l)] + bgeo.gamma.get(p, j, l) * g[(k, p)];
        }
        v
    };
    let mut t1 = 0.0;
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let a = 0.5 * (gi[(i, k)] * gi[(j, l)] - gi[(i, j)] * gi[(k, l)]);
                if a != 0.0 {
                    t1 += a * dg(j, k, l);
                }
            }
        }
    }
    let pv = v.evaluate(x);
    let dv: Vec<f64> = (0..n).map(|a| (0..n).map(|c| gi[(a, c)] * pv.grad[c]).sum()).collect();
    let mut t2 = 0.0;
    for j in 0..n {
        for k in 0..n {
            t2 += 0.5 * (dv[i] * gi[(j, k)] - dv[j] * gi[(i, k)]) * (g[(j, k)] - bgeo.g[(j, k)]);
        }
    }
    Ok(2.0 * g.determinant().sqrt() * (pv.v * t1 + t2))
}

/// 𝕌-flux mass over {r = R}.
pub fn mass_u_flux(s: &MassSetup, v: &dyn PotentialField, r: f64) -> Result<f64> {
    Ok(flux_normalization(s.n()) * s.sum_nodes(r, |x, _| u_flux_density(s, v, x))?)
}

/// Integrand of the frame formula (without the R^{n-1}(R²+k) prefactor).
pub fn frame_density(s: &MassSetup, x: &[f64]) -> Result<f64> {
    let n = s.n();
    let e = frame_deviation_jet(&s.g, &s.b, x)?;
    let r = x[s.radial()];
    let k = s.k as f64;
    let w = r * r + k;
    let mut acc = 0.0;
    for a in 0..n - 1 {
        let eii = e[a * n + a];
        acc -= eii.g[s.radial()] + k * eii.v / (r * w);
    }
    acc += (n as f64 - 1.0) * e[(n - 1) * n + (n - 1)].v / r;
    Ok(acc)
}

/// Frame-formula mass at radius R.
pub fn mass_frame(s: &MassSetup, r: f64) -> Result<f64> {
    let n = s.n();
    let pref = r.powi(n as i32 - 1) * (r * r + s.k as f64);
    let sum = s.sum_nodes(r, |x, y| Ok(s.boundary.sqrt_det(y) * frame_density(s, x)?))?;
    Ok(flux_normalization(n) * pref * sum)
}

/// Mass aspect μ_ij (frame components, radial index last) on boundary
/// nodes, with measure weights already including √det h.
#[derive(Clone, Debug, PartialEq)]
pub struct MassAspect {
    pub n: usize,
    pub weights: Vec<f64>,
    pub mu: Vec<DMatrix<f64>>,
}

impl MassAspect {
    /// The same μ at every node of `boundary`.
    pub fn constant(n: usize, boundary: &Boundary, res: usize, mu: DMatrix<f64>) -> Self {
        let nodes = boundary.quadrature(res);
        let weights = nodes.iter().map(|q| q.w * boundary.sqrt_det(&q.y)).collect();
        MassAspect { n, weights, mu: vec![mu; nodes.len()] }
    }

    /// R^n e_ij(R) sampled at radius R.
    pub fn at_radius(s: &MassSetup, r: f64) -> Result<Self> {
        let n = s.n();
        let nodes = s.nodes();
        let mut weights = Vec::with_capacity(nodes.len());
        let mut mu = Vec::with_capacity(nodes.len());
        for q in &nodes {
            let e = crate::metrics::frame_deviation(&s.g, &s.b, &s.point(r, &q.y))?;
            weights.push(q.w * s.boundary.sqrt_det(&q.y));
            mu.push(e * r.powi(n as i32));
        }
        Ok(MassAspect { n, weights, mu })
    }

    /// Node-wise extrapolation of R^n e_ij along a doubling ladder.
    pub fn from_metric(s: &MassSetup, ladder: &[f64]) -> Result<Self> {
        let samples: Result<Vec<MassAspect>> = ladder.iter().map(|r| Self::at_radius(s, *r)).collect();
        let samples = samples?;
        let n = s.n();
        let mut out = samples[0].clone();
        for (node, m) in out.mu.iter_mut().enumerate() {
            for a in 0..n {
                for c in 0..n {
                    let vals: Vec<f64> = samples.iter().map(|sm| sm.mu[node][(a, c)]).collect();
                    m[(a, c)] = extrapolate_limit(ladder, &vals)?.limit;
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        MassAspect { mu: self.mu.iter().map(|m| m * c).collect(), ..self.clone() }
    }
}

/// Pointwise combination (n-1) μ_nn + n Σ_{i<n} μ_ii.
pub fn aspect_density(mu: &DMatrix<f64>, n: usize) -> f64 {
    let tang: f64 = (0..n - 1).map(|a| mu[(a, a)]).sum();
    (n as f64 - 1.0) * mu[(n - 1, n - 1)] + n as f64 * tang
}

/// ∫ ((n-1)μ_nn + n Σ μ_ii) dμ_{h_k}, normalised.
pub fn mass_aspect_formula(mu: &MassAspect, n: usize) -> f64 {
    let terms: Vec<f64> = mu.weights.iter().zip(&mu.mu).map(|(w, m)| w * aspect_density(m, n)).collect();
    flux_normalization(n) * pairwise_sum(&terms)
}

/// Values of the traceless-Ricci mass at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciMass {
    pub value: f64,
    /// The D^iV - (1/2V) D^i|dV|² form, when V is static for g itself.
    pub static_pair: Option<f64>,
    /// max |R + n(n-1)| over the sampled sphere.
    pub scalar_deviation: f64,
    /// Set when the scalar curvature is not constant, which invalidates the
    /// Bianchi step behind this form of the mass.
    pub warning: bool,
}

struct RicciPoint {
    ricci: f64,
    pair: f64,
    scalar_dev: f64,
    kid: f64,
}

fn ricci_point(s: &MassSetup, v: &dyn PotentialField, x: &[f64]) -> Result<RicciPoint> {
    let n = s.n();
    let i = s.radial();
    let geo = PointGeometry::at(&s.g, x)?;
    let curv = geo.curvature();
    let pv = v.evaluate(x);
    let sq = geo.g.determinant().sqrt();
    let gi = &geo.ginv;
    let dv: Vec<f64> = (0..n).map(|a| (0..n).map(|c| gi[(a, c)] * pv.grad[c]).sum()).collect();
    // R^i_j - R/n δ^i_j
    let mut ric = 0.0;
    for j in 0..n {
        let mut rij: f64 = (0..n).map(|k| gi[(i, k)] * curv.ricci(k, j)).sum();
        if i == j {
            rij -= curv.scalar / n as f64;
        }
        ric -= dv[j] * rij;
    }
    // ∂_j |dV|² = ∂_j g^{ab} V_a V_b + 2 g^{ab} V_aj V_b
    let mut d_norm = vec![0.0; n];
    for (j, dn) in d_norm.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut dgi = 0.0;
                for c in 0..n {
                    for d in 0..n {
                        dgi -= gi[(a, c)] * geo.dg[(j * n + c) * n + d] * gi[(d, b)];
                    }
                }
                acc += dgi * pv.grad[a] * pv.grad[b] + 2.0 * gi[(a, b)] * pv.hess[(a, j)] * pv.grad[b];
            }
        }
        *dn = acc;
    }
    let up: f64 = (0..n).map(|j| gi[(i, j)] * d_norm[j]).sum();
    let pair = dv[i] - up / (2.0 * pv.v);
    let kid = kid_residual_raw(&geo, &pv, x)?.max;
    Ok(RicciPoint {
        ricci: ric * sq,
        pair: pair * sq,
        scalar_dev: (curv.scalar + (n * (n - 1)) as f64).abs(),
        kid,
    })
}

/// −∫_{r=R} D^jV (R^i_j − (R/n) δ^i_j) dσ_i, normalised; also the
/// static-pair form when V is a static potential of g.
pub fn mass_ricci(s: &MassSetup, v: &dyn PotentialField, r: f64) -> Result<RicciMass> {
    let n = s.n();
    let nodes = s.nodes();
    let pts: Result<Vec<(f64, RicciPoint)>> =
        nodes.par_iter().map(|q| Ok((q.w, ricci_point(s, v, &s.point(r, &q.y))?))).collect();
    let pts = pts?;
    let value = pairwise_sum(&pts.iter().map(|(w, p)| w * p.ricci).collect::<Vec<_>>());
    let pair = pairwise_sum(&pts.iter().map(|(w, p)| w * p.pair).collect::<Vec<_>>());
    let scalar_dev = pts.iter().fold(0.0f64, |m, (_, p)| m.max(p.scalar_dev));
    let kid = pts.iter().fold(0.0f64, |m, (_, p)| m.max(p.kid));
    let c = ricci_normalization(n);
    Ok(RicciMass {
        value: c * value,
        static_pair: (kid < 1e-6).then_some(c * pair),
        scalar_deviation: scalar_dev,
        warning: scalar_dev > 1e-6 * (n * (n - 1)) as f64,
    })
}

/// Mass values on a ladder plus the extrapolated limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub formula: MassFormula,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub error: f64,
    pub order: f64,
    pub unreliable: bool,
}

/// Evaluates `formula` along `ladder` and extrapolates.
pub fn mass_report(formula: MassFormula, s: &MassSetup, v: &dyn PotentialField, ladder: &[f64]) -> Result<MassReport> {
    let n = s.n();
    let values: Result<Vec<f64>> = ladder
        .iter()
        .map(|&r| match formula {
            MassFormula::UFlux => mass_u_flux(s, v, r),
            MassFormula::Frame => mass_frame(s, r),
            MassFormula::Aspect => Ok(mass_aspect_formula(&MassAspect::at_radius(s, r)?, n)),
            MassFormula::Ricci => Ok(mass_ricci(s, v, r)?.value),
        })
        .collect();
    let values = values?;
    let e = extrapolate_limit(ladder, &values)?;
    Ok(MassReport {
        formula,
        radii: ladder.to_vec(),
        values,
        limit: e.limit,
        error: e.error,
        order: e.order,
        unreliable: e.unreliable,
    })
}

/// Empirical decay of the deviation from the background.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    /// max over the sampled sphere of Σ|e_ij|.
    pub deviation: Vec<f64>,
    /// max over the sampled sphere of Σ|f_k(e_ij)|.
    pub derivative: Vec<f64>,
    pub exponent_deviation: f64,
    pub exponent_derivative: f64,
    /// Exponents must exceed this (n/2 for n > 2, 1 for n = 2).
    pub threshold: f64,
    pub pass: bool,
}

/// Least-squares slope of -log v against log R; +∞ for identically zero v.
fn decay_exponent(r: &[f64], v: &[f64]) -> f64 {
    if v.iter().all(|x| *x <= 1e-300) {
        return f64::INFINITY;
    }
    let pts: Vec<(f64, f64)> = r.iter().zip(v).filter(|(_, y)| **y > 1e-300).map(|(x, y)| (x.ln(), y.ln())).collect();
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

pub fn decay_report(s: &MassSetup, ladder: &[f64]) -> Result<DecayReport> {
    let n = s.n();
    let radial = s.radial();
    let order: Vec<usize> = (0..n).filter(|&a| a != radial).chain(std::iter::once(radial)).collect();
    let nodes = s.boundary.quadrature(s.res.min(3));
    let mut dev = Vec::new();
    let mut der = Vec::new();
    for &r in ladder {
        let mut m0: f64 = 0.0;
        let mut m1: f64 = 0.0;
        for q in &nodes {
            let x = s.point(r, &q.y);
            let e = frame_deviation_jet(&s.g, &s.b, &x)?;
            let b = s.b.components(&x)?;
            m0 = m0.max(e.iter().map(|j| j.v.abs()).sum());
            let mut acc = 0.0;
            for &a in &order {
                let scale = 1.0 / b[(a, a)].sqrt();
                acc += e.iter().map(|j| (scale * j.g[a]).abs()).sum::<f64>();
            }
            m1 = m1.max(acc);
        }
        dev.push(m0);
        der.push(m1);
    }
    let threshold = if n > 2 { n as f64 / 2.0 } else { 1.0 };
    let (e0, e1) = (decay_exponent(ladder, &dev), decay_exponent(ladder, &der));
    Ok(DecayReport {
        radii: ladder.to_vec(),
        deviation: dev,
        derivative: der,
        exponent_deviation: e0,
        exponent_derivative: e1,
        threshold,
        pass: e0 > threshold && e1 > threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hm_n3_all_formulas() {
        let p = HMParams::new(3, 1.0).unwrap();
        let s = MassSetup::hm(&p);
        let v = s.background_potential();
        for f in MassFormula::ALL {
            let rep = mass_report(f, &s, &v, &DEFAULT_LADDER).unwrap();
            assert!((rep.limit + 2.0).abs() < 1e-6, "{f:?}: {}", rep.limit);
        }
    }

    #[test]
    fn trivial_metric_has_zero_mass() {
        let p = HMParams::new(4, 1.0).unwrap();
        let s = MassSetup::hm(&p).trivial();
        let v = s.background_potential();
        for r in DEFAULT_LADDER {
            assert!(mass_u_flux(&s, &v, r).unwrap().abs() < 1e-12);
            assert!(mass_frame(&s, r).unwrap().abs() < 1e-12);
            assert!(mass_aspect_formula(&MassAspect::at_radius(&s, r).unwrap(), 4).abs() < 1e-12);
        }
    }
}
