//! Mass of boundary-glued manifolds: weighted sums of the per-summand mass
//! integrals, the Hempel bracket for the Horowitz-Myers case, neck-annulus
//! diagnostics and genus bookkeeping.

use crate::error::{AlhError, Result};
use crate::kids::{PotentialValue, StaticPotential};
use crate::mass::{
    extrapolate_limit, flux_normalization, mass_ricci, MassAspect, MassSetup, PotentialField, aspect_density,
};
use crate::quad::{gauss_legendre_on, pairwise_sum};
use crate::yamabe::{c1, cubic_weights, sup_inverse_density, ConformalSolution, LimitProfile, CUSP_RADIUS};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Positive conformal weight ψ on a summand's boundary, extended to the
/// interior by ∂_r ψ = 0.
pub trait BoundaryWeight: Send + Sync {
    fn value(&self, y: &[f64]) -> f64;

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(y.len());
        let mut p = y.to_vec();
        for a in 0..y.len() {
            let h = 1e-5 * (1.0 + y[a].abs());
            p[a] = y[a] + h;
            let fp = self.value(&p);
            p[a] = y[a] - h;
            let fm = self.value(&p);
            p[a] = y[a];
            out.push((fp - fm) / (2.0 * h));
        }
        out
    }
}

impl BoundaryWeight for f64 {
    fn value(&self, _y: &[f64]) -> f64 {
        *self
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        vec![0.0; y.len()]
    }
}

/// A weight given by a closure of the boundary coordinates.
pub struct FnWeight<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Send + Sync> BoundaryWeight for FnWeight<F> {
    fn value(&self, y: &[f64]) -> f64 {
        (self.0)(y)
    }
}

/// Samples on an m×m periodic grid over a flat 2-torus, read in fractional
/// coordinates y_a / period_a and interpolated bicubically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridWeight {
    pub periods: [f64; 2],
    pub m: usize,
    /// Row-major, index l * m + j for the node (j/m, l/m).
    pub values: Vec<f64>,
}

impl GridWeight {
    /// e^{-ω_∞/2} on the unit square, with the cusp model
    /// ρ(|log ρ| + c) inside the cusp radius.
    pub fn from_limit(lp: &LimitProfile, periods: [f64; 2], m: usize) -> Result<Self> {
        let p = lp.solutions[0].grid.domain.punctures[0];
        let mut values = Vec::with_capacity(m * m);
        for l in 0..m {
            for j in 0..m {
                let x = [j as f64 / m as f64, l as f64 / m as f64];
                let d = crate::yamabe::torus_delta(x, p);
                let rho = d[0].hypot(d[1]);
                let v = if rho < CUSP_RADIUS {
                    if rho == 0.0 {
                        0.0
                    } else {
                        rho * (rho.ln().abs() + lp.cusp.c)
                    }
                } else {
                    (-0.5 * lp.omega(x)?).exp()
                };
                values.push(v);
            }
        }
        Ok(Self { periods, m, values })
    }
}

impl BoundaryWeight for GridWeight {
    fn value(&self, y: &[f64]) -> f64 {
        let m = self.m as i64;
        let sx = (y[0] / self.periods[0]).rem_euclid(1.0) * m as f64;
        let sy = (y[1] / self.periods[1]).rem_euclid(1.0) * m as f64;
        let (j0, l0) = (sx.floor() as i64, sy.floor() as i64);
        let wx = cubic_weights(sx - j0 as f64);
        let wy = cubic_weights(sy - l0 as f64);
        let mut acc = 0.0;
        for (kl, wl) in wy.iter().enumerate() {
            let l = (l0 - 1 + kl as i64).rem_euclid(m) as usize;
            for (kj, wj) in wx.iter().enumerate() {
                let j = (j0 - 1 + kj as i64).rem_euclid(m) as usize;
                acc += wl * wj * self.values[l * self.m + j];
            }
        }
        acc
    }
}

/// How the neck region is removed from each summand's boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeckScheme {
    /// Conformal factors on all of ∂M_a, vanishing weight carried by ψ.
    Localised,
    /// Integration over Ω_a: ∂M_a minus a coordinate disc around the neck.
    Ils,
}

/// One summand of a boundary gluing.
#[derive(Clone)]
pub struct Summand {
    pub setup: MassSetup,
    pub potential: StaticPotential,
    pub psi: Arc<dyn BoundaryWeight>,
    pub aspect: Option<MassAspect>,
    /// Excised neck disc (centre, radius) in boundary coordinates, used by
    /// the ILS scheme.
    pub neck: Option<(Vec<f64>, f64)>,
}

impl Summand {
    pub fn new(setup: MassSetup, potential: StaticPotential, psi: Arc<dyn BoundaryWeight>) -> Self {
        Self { setup, potential, psi, aspect: None, neck: None }
    }

    fn weight(&self, y: &[f64], scheme: NeckScheme) -> (f64, Vec<f64>) {
        if scheme == NeckScheme::Ils {
            if let Some((c, r)) = &self.neck {
                let d2: f64 = y.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
                if d2 < r * r {
                    return (0.0, vec![0.0; y.len()]);
                }
            }
        }
        (self.psi.value(y), self.psi.gradient(y))
    }
}

#[derive(Clone)]
pub struct GluingSpec {
    pub summands: Vec<Summand>,
    pub scheme: NeckScheme,
}

impl GluingSpec {
    pub fn new(summands: Vec<Summand>, scheme: NeckScheme) -> Result<Self> {
        let Some(first) = summands.first() else {
            return Err(AlhError::Spec("a gluing needs at least one summand".into()));
        };
        let n = first.setup.n();
        let kind = std::mem::discriminant(&first.setup.boundary);
        for s in &summands {
            if s.setup.n() != n || std::mem::discriminant(&s.setup.boundary) != kind {
                return Err(AlhError::Spec("summands have mismatched boundary charts".into()));
            }
            if s.potential.dim() != n {
                return Err(AlhError::Spec("potential dimension differs from its summand".into()));
            }
        }
        Ok(Self { summands, scheme })
    }
}

/// ψV with ψ independent of the radial coordinate.
struct Weighted<'a> {
    s: &'a Summand,
    scheme: NeckScheme,
    radial: usize,
}

impl PotentialField for Weighted<'_> {
    fn evaluate(&self, x: &[f64]) -> PotentialValue {
        let n = x.len();
        let mut y = x.to_vec();
        y.remove(self.radial);
        let (psi, gy) = self.s.weight(&y, self.scheme);
        let mut dpsi = gy;
        dpsi.insert(self.radial, 0.0);
        let v = self.s.potential.evaluate(x);
        let grad: Vec<f64> = (0..n).map(|a| psi * v.grad[a] + v.v * dpsi[a]).collect();
        let hess = DMatrix::from_fn(n, n, |a, b| psi * v.hess[(a, b)] + dpsi[a] * v.grad[b] + dpsi[b] * v.grad[a]);
        PotentialValue { v: psi * v.v, grad, hess }
    }
}

/// Per-summand and total weighted traceless-Ricci masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluedMass {
    pub total: f64,
    pub summands: Vec<f64>,
    pub error: f64,
}

/// Σ_a lim_R of the Ricci-form mass with V_a replaced by ψ_a V_a.
pub fn glued_mass(spec: &GluingSpec, ladder: &[f64]) -> Result<GluedMass> {
    let mut summands = Vec::new();
    let mut error = 0.0;
    for s in &spec.summands {
        let radial = s.setup.b.radial.unwrap_or(0);
        let field = Weighted { s, scheme: spec.scheme, radial };
        let vals: Result<Vec<f64>> = ladder.iter().map(|&r| Ok(mass_ricci(&s.setup, &field, r)?.value)).collect();
        let e = extrapolate_limit(ladder, &vals?)?;
        summands.push(e.limit);
        error += e.error;
    }
    Ok(GluedMass { total: summands.iter().sum(), summands, error })
}

/// Σ_a ∫ ψ_a ((n-1)μ_nn + n Σ μ_ii) dμ_{h_k}, with the same normalisation as
/// the single-summand aspect formula.
pub fn glued_mass_aspect(spec: &GluingSpec) -> Result<f64> {
    let mut total = 0.0;
    for s in &spec.summands {
        let n = s.setup.n();
        let mu = match &s.aspect {
            Some(m) => m.clone(),
            None => return Err(AlhError::Spec("summand has no mass aspect".into())),
        };
        let nodes = s.setup.boundary.quadrature(s.setup.res);
        if nodes.len() != mu.weights.len() {
            return Err(AlhError::Spec("mass aspect was sampled at a different resolution".into()));
        }
        let terms: Vec<f64> = nodes
            .iter()
            .zip(mu.weights.iter().zip(&mu.mu))
            .map(|(q, (w, m))| w * s.weight(&q.y, spec.scheme).0 * aspect_density(m, n))
            .collect();
        total += flux_normalization(n) * pairwise_sum(&terms);
    }
    Ok(total)
}

/// Bracket on the glued Horowitz-Myers mass from the Hempel inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HmBracket {
    /// -2 m_c sup e^{-ω_∞/2}.
    pub lower: f64,
    /// -2 m_c ∫ |z||log|z||.
    pub upper: f64,
    /// -2 m_c ∫ |z|(|log|z|| + C₁), from the other side of the inequality.
    pub weak_lower: f64,
}

/// ∫ over the square [-½,½]² of f(|z|), using its eightfold symmetry:
/// 8 ∫_0^½ dx ∫_0^x dy, with the y-interval mapped to [0,1] so the
/// origin singularity sits at a panel end.
fn square_radial_integral(f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = Vec::new();
    // Geometric panels towards x = 0.
    let mut edges = vec![0.5];
    while *edges.last().unwrap() > 1e-8 {
        let e = edges.last().unwrap() * 0.5;
        edges.push(e);
    }
    edges.push(0.0);
    edges.reverse();
    let (tq, tw) = gauss_legendre_on(20, 0.0, 1.0);
    for w in edges.windows(2) {
        let (xq, xw) = gauss_legendre_on(20, w[0], w[1]);
        for (x, wx) in xq.iter().zip(&xw) {
            let inner: f64 = tq.iter().zip(&tw).map(|(t, wt)| wt * f(x * (1.0 + t * t).sqrt())).sum();
            acc.push(wx * x * inner);
        }
    }
    8.0 * pairwise_sum(&acc)
}

pub fn hm_bracket(m_c: f64) -> Result<HmBracket> {
    if !(m_c >= 0.0) {
        return Err(AlhError::Parameter(format!("m_c = {m_c} must be non-negative")));
    }
    let upper_int = square_radial_integral(|r| if r > 0.0 { r * r.ln().abs() } else { 0.0 });
    let weak_int = square_radial_integral(|r| if r > 0.0 { r * (r.ln().abs() + c1()) } else { 0.0 });
    Ok(HmBracket {
        lower: -2.0 * m_c * sup_inverse_density(),
        upper: -2.0 * m_c * upper_int,
        weak_lower: -2.0 * m_c * weak_int,
    })
}

/// -2 m_c ∫ e^{-ω_∞/2} dμ_{h0} over the unit-area square torus.
pub fn hm_glued_limit_mass(m_c: f64, lp: &LimitProfile) -> f64 {
    -2.0 * m_c * lp.inverse_density_integral
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusDiagnostics {
    pub eps: f64,
    /// ∫ (ψ + ε|dψ| + ε²|∂²ψ|) over D(2ε) \ D(ε/2).
    pub diagnostic: f64,
    pub area: f64,
    pub psi_term: f64,
    pub gradient_term: f64,
    pub hessian_term: f64,
}

/// Unit-constant proxy for the neck-annulus error terms of a weight ψ
/// given on the plane around `center`.
pub fn annulus_diagnostics(
    eps: f64,
    center: [f64; 2],
    psi: &dyn Fn([f64; 2]) -> Result<f64>,
) -> Result<AnnulusDiagnostics> {
    if !(eps > 0.0) {
        return Err(AlhError::Parameter(format!("ε = {eps} must be positive")));
    }
    let (rq, rw) = gauss_legendre_on(16, 0.5 * eps, 2.0 * eps);
    let m = 64;
    let h = eps / 64.0;
    let (mut t0, mut t1, mut t2, mut area) = (0.0, 0.0, 0.0, 0.0);
    for (rho, wr) in rq.iter().zip(&rw) {
        for b in 0..m {
            let phi = 2.0 * PI * b as f64 / m as f64;
            let x = [center[0] + rho * phi.cos(), center[1] + rho * phi.sin()];
            let at = |dx: f64, dy: f64| psi([x[0] + dx, x[1] + dy]);
            let f0 = at(0.0, 0.0)?;
            let (fxp, fxm, fyp, fym) = (at(h, 0.0)?, at(-h, 0.0)?, at(0.0, h)?, at(0.0, -h)?);
            let fxy = (at(h, h)? - at(h, -h)? - at(-h, h)? + at(-h, -h)?) / (4.0 * h * h);
            let gx = (fxp - fxm) / (2.0 * h);
            let gy = (fyp - fym) / (2.0 * h);
            let fxx = (fxp - 2.0 * f0 + fxm) / (h * h);
            let fyy = (fyp - 2.0 * f0 + fym) / (h * h);
            let w = wr * rho * 2.0 * PI / m as f64;
            t0 += w * f0;
            t1 += w * gx.hypot(gy);
            t2 += w * (fxx * fxx + fyy * fyy + 2.0 * fxy * fxy).sqrt();
            area += w;
        }
    }
    Ok(AnnulusDiagnostics {
        eps,
        diagnostic: t0 + eps * t1 + eps * eps * t2,
        area,
        psi_term: t0,
        gradient_term: t1,
        hessian_term: t2,
    })
}

/// Diagnostics for ψ_i = e^{-ω_i/2} of a solved neck problem.
pub fn annulus_diagnostics_solution(eps: f64, s: &ConformalSolution) -> Result<AnnulusDiagnostics> {
    let p = s.grid.domain.punctures[0];
    if 2.0 * eps > s.grid.rho_out || 0.5 * eps <= 1.0 / s.i() {
        return Err(AlhError::Domain(format!("annulus [ε/2, 2ε] with ε = {eps} is outside the resolved neck region")));
    }
    annulus_diagnostics(eps, p, &|x| Ok((-0.5 * s.omega_at(x)?).exp()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenusScheme {
    /// Two copies of the torus joined through N necks.
    SymmetricDouble,
    /// One torus with N̂ handles added by self-gluing.
    SelfHandles,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenusReport {
    pub necks: usize,
    pub euler: i64,
    pub genus: i64,
    /// Hyperbolic area as a multiple of π, -2χ.
    pub area_over_pi: i64,
    pub area: f64,
}

pub fn genus_bookkeeping(necks: usize, scheme: GenusScheme) -> Result<GenusReport> {
    if necks == 0 {
        return Err(AlhError::Parameter("at least one neck is required".into()));
    }
    let nn = necks as i64;
    // Each neck removes two discs (χ -= 2) and adds a cylinder (χ += 0).
    let euler = match scheme {
        GenusScheme::SymmetricDouble => -2 * nn,
        GenusScheme::SelfHandles => -2 * nn,
    };
    let genus = (2 - euler) / 2;
    Ok(GenusReport { necks, euler, genus, area_over_pi: -2 * euler, area: -2.0 * PI * euler as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_values() {
        let b = hm_bracket(1.0).unwrap();
        assert!((b.lower + 1.18).abs() < 0.02);
        assert!((b.upper + 0.6754359146).abs() < 1e-8);
        assert!((b.weak_lower + 4.0246057421).abs() < 1e-6);
        let z = hm_bracket(0.0).unwrap();
        assert_eq!((z.lower, z.upper), (0.0, 0.0));
    }

    #[test]
    fn genus_examples() {
        for (n, g) in [(1, 2), (2, 3), (3, 4)] {
            let r = genus_bookkeeping(n, GenusScheme::SymmetricDouble).unwrap();
            assert_eq!(r.genus, g);
            assert_eq!(r.area_over_pi, 4 * n as i64);
        }
        assert_eq!(genus_bookkeeping(1, GenusScheme::SelfHandles).unwrap().genus, 2);
    }
}
