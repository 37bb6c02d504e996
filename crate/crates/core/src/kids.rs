//! Static potentials of the Birmingham-Kottler and Horowitz-Myers families
//! and the residual of the static KID equations
//! A_ij = D_iD_jV - V(R_ij + n g_ij).

use crate::error::{AlhError, Result};
use crate::jet::{Jet, Scalar};
use crate::metrics::{bk_spatial, hm_spatial, BKParams, Boundary, ChartMetric, HMParams, PointGeometry};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One member of a static-potential family, with the parameters of the
/// metric it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StaticPotential {
    /// V = c̃ √f on BK with any m_c.
    BKGeneric { params: BKParams, c_tilde: f64 },
    /// V = β(r) + r Ω(y) on the m_c = 0 background. `omega` holds the
    /// coefficients of the non-constant solutions of D_AD_BΩ = h(ĉ - kΩ)
    /// (linear functions on the torus, ambient coordinates on the sphere,
    /// Minkowski coordinates on the hyperbolic chart).
    BKZeroMass { params: BKParams, c_tilde: f64, c_hat: f64, omega: Vec<f64> },
    /// Two-dimensional family on dr²/(r² - 2m_c) + r² dψ².
    N2Family { m_c: f64, c_tilde: f64, c_hat: f64, a: f64, b: f64 },
    /// V = c̃₁ r + r Σ c_I θ^I on HM with m_c ≠ 0.
    HMFamily { params: HMParams, c1: f64, c_i: Vec<f64> },
}

/// V with its coordinate gradient and Hessian.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialValue {
    pub v: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
}

/// Ambient coordinates of a point of the unit sphere in hyperspherical
/// angles; length d+1.
pub fn sphere_embedding<T: Scalar>(y: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(y.len() + 1);
    let mut s = T::cst(1.0);
    for a in y {
        out.push(s * a.cos());
        s = s * a.sin();
    }
    out.push(s);
    out
}

impl StaticPotential {
    /// Dimension of the chart the potential lives on.
    pub fn dim(&self) -> usize {
        match self {
            StaticPotential::BKGeneric { params, .. } | StaticPotential::BKZeroMass { params, .. } => params.n,
            StaticPotential::N2Family { .. } => 2,
            StaticPotential::HMFamily { params, .. } => params.n,
        }
    }

    /// The metric the potential is static for.
    pub fn metric(&self) -> ChartMetric {
        match self {
            StaticPotential::BKGeneric { params, .. } | StaticPotential::BKZeroMass { params, .. } => bk_spatial(params),
            StaticPotential::N2Family { m_c, .. } => {
                bk_spatial(&BKParams::new(2, 0, *m_c, Boundary::flat_torus(vec![2.0 * std::f64::consts::PI])).unwrap())
            }
            StaticPotential::HMFamily { params, .. } => hm_spatial(params),
        }
    }

    pub fn value<T: Scalar>(&self, x: &[T]) -> T {
        let r = x[0];
        match self {
            StaticPotential::BKGeneric { params, c_tilde } => params.f(r).sqrt() * *c_tilde,
            StaticPotential::BKZeroMass { params, c_tilde, c_hat, omega } => {
                let k = params.k as f64;
                let y = &x[1..];
                let beta = if params.k == 0 {
                    r.recip() * (0.5 * c_hat) + r * *c_tilde
                } else {
                    r * (-c_hat / k) + (r * r + k).sqrt() * *c_tilde
                };
                let om = match &params.boundary {
                    Boundary::FlatTorus { .. } => {
                        let mut s = T::cst(0.0);
                        for (ya, c) in y.iter().zip(omega) {
                            s = s + *ya * *c + *ya * *ya * (0.5 * c_hat);
                        }
                        s
                    }
                    Boundary::RoundSphere { .. } => {
                        let mut s = T::cst(*c_hat);
                        for (xa, c) in sphere_embedding(y).iter().zip(omega) {
                            s = s + *xa * *c;
                        }
                        s
                    }
                    Boundary::HyperbolicBall { .. } => {
                        let th = y[0];
                        let mut s = th.cosh() * omega[0] - *c_hat;
                        let u = sphere_embedding(&y[1..]);
                        for (ua, c) in u.iter().zip(&omega[1..]) {
                            s = s + th.sinh() * *ua * *c;
                        }
                        s
                    }
                };
                beta + r * om
            }
            StaticPotential::N2Family { m_c, c_tilde, c_hat, a, b } => {
                let psi = x[1];
                let m = *m_c;
                if m == 0.0 {
                    let beta = r.recip() * (0.5 * c_hat) + r * *c_tilde;
                    beta + r * (psi * psi * (0.5 * c_hat) + psi * *a + *b)
                } else {
                    let beta = r * (c_hat / (2.0 * m)) + (r * r - 2.0 * m).sqrt() * *c_tilde;
                    let w = (2.0 * m.abs()).sqrt();
                    let om = if m > 0.0 {
                        (psi * w).exp() * *a + (psi * (-w)).exp() * *b - c_hat / (2.0 * m)
                    } else {
                        (psi * w).sin() * *a + (psi * w).cos() * *b - c_hat / (2.0 * m)
                    };
                    beta + r * om
                }
            }
            StaticPotential::HMFamily { c1, c_i, .. } => {
                let mut s = T::cst(*c1);
                for (th, c) in x[2..].iter().zip(c_i) {
                    s = s + *th * *c;
                }
                r * s
            }
        }
    }

    /// V, ∇V and Hess V in chart coordinates (exact).
    pub fn evaluate(&self, x: &[f64]) -> PotentialValue {
        let n = x.len();
        let j: Jet = self.value(&Jet::point(x));
        PotentialValue { v: j.v, grad: j.g[..n].to_vec(), hess: DMatrix::from_fn(n, n, |a, b| j.h[a][b]) }
    }

    /// False when the member is not single-valued on the compactified
    /// boundary (HM c_I terms, linear terms on tori, ...).
    pub fn is_periodic(&self) -> bool {
        match self {
            StaticPotential::BKGeneric { .. } => true,
            StaticPotential::BKZeroMass { params, c_hat, omega, .. } => match params.boundary {
                Boundary::FlatTorus { .. } => *c_hat == 0.0 && omega.iter().all(|c| *c == 0.0),
                _ => true,
            },
            StaticPotential::N2Family { m_c, c_hat, a, b, .. } => {
                if *m_c < 0.0 {
                    true
                } else {
                    *c_hat == 0.0 && *a == 0.0 && (*m_c > 0.0 && *b == 0.0 || *m_c == 0.0)
                }
            }
            StaticPotential::HMFamily { c_i, .. } => c_i.iter().all(|c| *c == 0.0),
        }
    }

    /// Linear combination within the same family type.
    pub fn scaled(&self, s: f64) -> StaticPotential {
        let mut out = self.clone();
        match &mut out {
            StaticPotential::BKGeneric { c_tilde, .. } => *c_tilde *= s,
            StaticPotential::BKZeroMass { c_tilde, c_hat, omega, .. } => {
                *c_tilde *= s;
                *c_hat *= s;
                omega.iter_mut().for_each(|c| *c *= s);
            }
            StaticPotential::N2Family { c_tilde, c_hat, a, b, .. } => {
                *c_tilde *= s;
                *c_hat *= s;
                *a *= s;
                *b *= s;
            }
            StaticPotential::HMFamily { c1, c_i, .. } => {
                *c1 *= s;
                c_i.iter_mut().for_each(|c| *c *= s);
            }
        }
        out
    }
}

/// Residual of the static KID equations at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KIDResidual {
    pub max: f64,
    /// A_ij in a g-orthonormal frame (row-major).
    pub components: Vec<f64>,
    /// g^{ij} A_ij.
    pub trace: f64,
    /// ΔV - nV; equals the trace when g is Einstein.
    pub laplace_residual: f64,
    pub point: Vec<f64>,
}

/// Lower Cholesky factor inverse, used to pass to an orthonormal frame.
fn on_transform(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ch = g.clone().cholesky().ok_or_else(|| AlhError::Domain("metric not positive definite".into()))?;
    ch.l().try_inverse().ok_or_else(|| AlhError::Singularity("degenerate metric".into()))
}

/// A_ij for a potential given by value, gradient and Hessian.
pub fn kid_residual_raw(geo: &PointGeometry, pv: &PotentialValue, x: &[f64]) -> Result<KIDResidual> {
    let n = geo.n;
    let curv = geo.curvature();
    let mut a = DMatrix::zeros(n, n);
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut dd = pv.hess[(i, j)];
            for k in 0..n {
                dd -= geo.gamma.get(k, i, j) * pv.grad[k];
            }
            hess[(i, j)] = dd;
            a[(i, j)] = dd - pv.v * (curv.ricci(i, j) + n as f64 * geo.g[(i, j)]);
        }
    }
    let linv = on_transform(&geo.g)?;
    let a_on = &linv * &a * linv.transpose();
    let trace = (geo.ginv.clone().component_mul(&a)).sum();
    let lap = (geo.ginv.clone().component_mul(&hess)).sum();
    Ok(KIDResidual {
        max: a_on.amax(),
        components: a_on.transpose().as_slice().to_vec(),
        trace,
        laplace_residual: lap - n as f64 * pv.v,
        point: x.to_vec(),
    })
}

/// KID residual of `v` on `g` at `x`. Christoffels and curvature come from
/// the exact path when `g` supports it.
pub fn kid_residual(g: &ChartMetric, v: &StaticPotential, x: &[f64]) -> Result<KIDResidual> {
    if g.dim() != v.dim() {
        return Err(AlhError::Dimension { expected: g.dim(), got: v.dim() });
    }
    let geo = PointGeometry::at(g, x)?;
    kid_residual_raw(&geo, &v.evaluate(x), x)
}

/// Form of β(r) in the zero-mass family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaForm {
    /// β = -ĉ r / k + c̃ √(r² + k)
    CurvedBoundary,
    /// β = ĉ / (2r) + c̃ r
    FlatBoundary,
}

/// The zero-mass family V = β(r) + r Ω on a given background.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroMassFamily {
    pub params: BKParams,
    pub beta: BetaForm,
    /// Number of coefficients in Ω beyond ĉ.
    pub omega_len: usize,
}

impl ZeroMassFamily {
    pub fn potential(&self, c_tilde: f64, c_hat: f64, omega: Vec<f64>) -> Result<StaticPotential> {
        if omega.len() != self.omega_len {
            return Err(AlhError::Dimension { expected: self.omega_len, got: omega.len() });
        }
        Ok(StaticPotential::BKZeroMass { params: self.params.clone(), c_tilde, c_hat, omega })
    }

    /// Max KID residual over random members and points.
    pub fn verify(&self, draws: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = bk_spatial(&self.params);
        let mut worst: f64 = 0.0;
        for _ in 0..draws {
            let om = (0..self.omega_len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v = self.potential(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), om)?;
            let x = random_point(&self.params.boundary, &mut rng, 1.5, 6.0);
            worst = worst.max(kid_residual(&g, &v, &x)?.max);
        }
        Ok(worst)
    }
}

/// A random chart point with r in [r_lo, r_hi], away from polar axes.
pub fn random_point(b: &Boundary, rng: &mut impl Rng, r_lo: f64, r_hi: f64) -> Vec<f64> {
    let mut x = vec![rng.gen_range(r_lo..r_hi)];
    match b {
        Boundary::FlatTorus { periods } => x.extend(periods.iter().map(|p| rng.gen_range(0.0..*p))),
        Boundary::RoundSphere { dim } => {
            for a in 0..*dim {
                x.push(if a + 1 == *dim { rng.gen_range(0.0..6.28) } else { rng.gen_range(0.3..2.8) });
            }
        }
        Boundary::HyperbolicBall { dim, .. } => {
            x.push(rng.gen_range(0.2..1.5));
            for a in 1..*dim {
                x.push(if a + 1 == *dim { rng.gen_range(0.0..6.28) } else { rng.gen_range(0.3..2.8) });
            }
        }
    }
    x
}

/// Static potentials of the m_c = 0 background with the given boundary.
pub fn bk_zero_mass_potentials(n: usize, k: i32, boundary: Boundary) -> Result<ZeroMassFamily> {
    if n < 3 {
        return Err(AlhError::Feature("n = 2 uses n2_potentials".into()));
    }
    let params = BKParams::new(n, k, 0.0, boundary)?;
    let d = n - 1;
    let (beta, omega_len) = match params.boundary {
        Boundary::FlatTorus { .. } => (BetaForm::FlatBoundary, d),
        Boundary::RoundSphere { .. } | Boundary::HyperbolicBall { .. } => (BetaForm::CurvedBoundary, d + 1),
    };
    Ok(ZeroMassFamily { params, beta, omega_len })
}

/// Sign branch of the two-dimensional family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassSign {
    Negative,
    Zero,
    Positive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct N2Family {
    pub m_c: f64,
    pub sign: MassSign,
}

impl N2Family {
    pub fn potential(&self, c_tilde: f64, c_hat: f64, a: f64, b: f64) -> StaticPotential {
        StaticPotential::N2Family { m_c: self.m_c, c_tilde, c_hat, a, b }
    }
}

/// The (β, Ω) family in space dimension two.
pub fn n2_potentials(m_c: f64) -> N2Family {
    let sign = if m_c > 0.0 {
        MassSign::Positive
    } else if m_c < 0.0 {
        MassSign::Negative
    } else {
        MassSign::Zero
    };
    N2Family { m_c, sign }
}

/// Metric whose static potentials are counted by [`family_dimension`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MetricSpec {
    BK(BKParams),
    HM(HMParams),
}

/// Dimension of the space of static potentials that are globally defined on
/// the compactified boundary.
pub fn family_dimension(spec: &MetricSpec) -> Result<usize> {
    match spec {
        MetricSpec::HM(_) => Ok(1),
        MetricSpec::BK(p) if p.n == 2 => {
            if p.m_c < 0.0 {
                // sin/cos members survive when the circle length is a
                // multiple of their period.
                let Boundary::FlatTorus { periods } = &p.boundary else { return Ok(1) };
                let w = (2.0 * (p.m_c - p.k as f64 / 2.0).abs()).sqrt();
                let q = w * periods[0] / (2.0 * std::f64::consts::PI);
                Ok(if (q - q.round()).abs() < 1e-12 { 3 } else { 1 })
            } else {
                Ok(1)
            }
        }
        MetricSpec::BK(p) if p.m_c != 0.0 => Ok(1),
        MetricSpec::BK(p) => match p.boundary {
            Boundary::FlatTorus { .. } => Ok(1),
            Boundary::RoundSphere { .. } => {
                Err(AlhError::Feature("round-sphere backgrounds (hyperbolic space) are not counted".into()))
            }
            Boundary::HyperbolicBall { .. } => {
                Err(AlhError::Feature("periodicity on a hyperbolic quotient is not modelled".into()))
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bk_generic_example() {
        let p = BKParams::with_default_boundary(3, 1, 0.7).unwrap();
        let v = StaticPotential::BKGeneric { params: p.clone(), c_tilde: 1.0 };
        let r = kid_residual(&bk_spatial(&p), &v, &[2.0, 1.0, 0.5]).unwrap();
        assert!(r.max < 1e-9, "{}", r.max);
    }

    #[test]
    fn hm_example() {
        let p = HMParams::new(4, 1.0).unwrap();
        let v = StaticPotential::HMFamily { params: p.clone(), c1: 1.0, c_i: vec![0.0, 0.0] };
        let r = kid_residual(&hm_spatial(&p), &v, &[3.0, 0.2, 0.1, 0.3]).unwrap();
        assert!(r.max < 1e-9);
        assert!(v.is_periodic());
    }

    #[test]
    fn non_solution_detected() {
        let p = BKParams::with_default_boundary(3, 0, 0.0).unwrap();
        let v = StaticPotential::BKZeroMass { params: p.clone(), c_tilde: 0.0, c_hat: 0.0, omega: vec![0.0; 2] };
        // V = r² is not in the family; evaluate through the raw residual.
        let geo = PointGeometry::at(&bk_spatial(&p), &[1.0, 0.1, 0.1]).unwrap();
        let pv = PotentialValue { v: 1.0, grad: vec![2.0, 0.0, 0.0], hess: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.0, 0.0])) };
        let r = kid_residual_raw(&geo, &pv, &[1.0, 0.1, 0.1]).unwrap();
        assert!(r.max > 0.1);
        let _ = v;
    }
}
