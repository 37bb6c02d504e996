//! Half-space and ball models of hyperbolic space, hyperbolic hyperplanes and
//! the isometries used to glue two manifolds along hyperplanes near their
//! conformal boundaries.

use crate::error::{domain, AlhError, Result};
use crate::jet::{Jet, Scalar, MAXD};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Tolerance for [`classify_side`] boundary detection.
pub const ON_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    HalfSpace,
    Ball,
}

impl Model {
    fn other(self) -> Model {
        match self {
            Model::HalfSpace => Model::Ball,
            Model::Ball => Model::HalfSpace,
        }
    }
}

/// A point of hyperbolic space in one of the two models. For the half-space
/// model the last coordinate is the height `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub model: Model,
    pub coords: Vec<f64>,
}

impl ModelPoint {
    pub fn new(model: Model, coords: Vec<f64>) -> Result<Self> {
        let p = ModelPoint { model, coords };
        p.validate()?;
        Ok(p)
    }

    pub fn half_space(coords: Vec<f64>) -> Result<Self> {
        Self::new(Model::HalfSpace, coords)
    }

    pub fn ball(coords: Vec<f64>) -> Result<Self> {
        Self::new(Model::Ball, coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coords.is_empty() || self.coords.len() > MAXD {
            return domain(format!("dimension {} not in 1..={MAXD}", self.coords.len()));
        }
        if self.coords.iter().any(|c| !c.is_finite()) {
            return domain("non-finite coordinate");
        }
        match self.model {
            Model::HalfSpace => {
                let z = *self.coords.last().unwrap();
                if z <= 0.0 {
                    return domain(format!("half-space point needs z > 0, got {z}"));
                }
            }
            Model::Ball => {
                let r2: f64 = self.coords.iter().map(|c| c * c).sum();
                if r2 >= 1.0 {
                    return domain(format!("ball point needs |x| < 1, got |x|^2 = {r2}"));
                }
            }
        }
        Ok(())
    }
}

/// Conformal factor of the hyperbolic metric at a point: g = factor * δ.
fn conformal_factor<T: Scalar>(model: Model, x: &[T]) -> T {
    match model {
        Model::HalfSpace => {
            let z = x[x.len() - 1];
            (z * z).recip()
        }
        Model::Ball => {
            let mut r2 = T::cst(0.0);
            for c in x {
                r2 = r2 + *c * *c;
            }
            let d = T::cst(1.0) - r2;
            (d * d).recip() * 4.0
        }
    }
}

/// The hyperbolic metric `δ/z²` (half-space) or `4δ/(1-|x|²)²` (ball).
pub fn hyperbolic_metric(p: &ModelPoint) -> Result<DMatrix<f64>> {
    p.validate()?;
    let n = p.dim();
    Ok(DMatrix::identity(n, n) * conformal_factor(p.model, &p.coords))
}

/// A hyperbolic hyperplane of the half-space model: the half-sphere of the
/// given radius centred on the ideal boundary {z = 0}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicHyperplane {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl HyperbolicHyperplane {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(AlhError::Parameter(format!("hyperplane radius must be positive, got {radius}")));
        }
        if center.len() + 1 > MAXD {
            return domain("hyperplane dimension too large");
        }
        Ok(HyperbolicHyperplane { center, radius })
    }

    /// Ambient dimension n of the half-space model it lives in.
    pub fn dim(&self) -> usize {
        self.center.len() + 1
    }

    /// A point on the half-sphere given a unit direction in the upper half.
    pub fn point_at(&self, dir: &[f64]) -> Vec<f64> {
        let mut p: Vec<f64> = self.center.iter().zip(dir).map(|(c, d)| c + self.radius * d).collect();
        p.push(self.radius * dir[self.center.len()]);
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Thin,
    Fat,
    On,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Which component of the complement of `h` the point lies in. The thin
/// component is the inside of the half-sphere.
pub fn classify_side(h: &HyperbolicHyperplane, p: &ModelPoint) -> Result<Side> {
    if p.model != Model::HalfSpace {
        return domain("classify_side expects a half-space point");
    }
    p.validate()?;
    if p.dim() != h.dim() {
        return Err(AlhError::Dimension { expected: h.dim(), got: p.dim() });
    }
    let n = p.dim();
    let mut d2 = p.coords[n - 1] * p.coords[n - 1];
    for (a, c) in h.center.iter().enumerate() {
        d2 += (p.coords[a] - c).powi(2);
    }
    let d = d2.sqrt();
    Ok(if (d - h.radius).abs() <= ON_TOL * h.radius.max(1.0) {
        Side::On
    } else if d < h.radius {
        Side::Thin
    } else {
        Side::Fat
    })
}

/// Elementary conformal maps of Euclidean space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Generator {
    Translation(Vec<f64>),
    /// Orthogonal matrix, row-major.
    Rotation(Vec<Vec<f64>>),
    Dilation(f64),
    Inversion { center: Vec<f64>, radius: f64 },
}

impl Generator {
    fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        match self {
            Generator::Translation(v) => x.iter().zip(v).map(|(a, b)| *a + *b).collect(),
            Generator::Rotation(q) => q
                .iter()
                .map(|row| {
                    let mut s = T::cst(0.0);
                    for (a, qa) in x.iter().zip(row) {
                        s = s + *a * *qa;
                    }
                    s
                })
                .collect(),
            Generator::Dilation(l) => x.iter().map(|a| *a * *l).collect(),
            Generator::Inversion { center, radius } => {
                let d: Vec<T> = x.iter().zip(center).map(|(a, c)| *a - *c).collect();
                let mut r2 = T::cst(0.0);
                for v in &d {
                    r2 = r2 + *v * *v;
                }
                let s = (r2.recip()) * (radius * radius);
                d.iter().zip(center).map(|(v, c)| *v * s + *c).collect()
            }
        }
    }

    fn inverse(&self) -> Generator {
        match self {
            Generator::Translation(v) => Generator::Translation(v.iter().map(|a| -a).collect()),
            Generator::Rotation(q) => {
                let n = q.len();
                Generator::Rotation((0..n).map(|i| (0..n).map(|j| q[j][i]).collect()).collect())
            }
            Generator::Dilation(l) => Generator::Dilation(1.0 / l),
            inv @ Generator::Inversion { .. } => inv.clone(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Generator::Translation(v) if v.len() != n => Err(AlhError::Dimension { expected: n, got: v.len() }),
            Generator::Rotation(q) => {
                if q.len() != n || q.iter().any(|r| r.len() != n) {
                    return Err(AlhError::Dimension { expected: n, got: q.len() });
                }
                let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
                let err = (m.transpose() * &m - DMatrix::identity(n, n)).amax();
                if err > 1e-12 {
                    return Err(AlhError::Validation(format!("rotation not orthogonal (residual {err:e})")));
                }
                Ok(())
            }
            Generator::Dilation(l) if *l <= 0.0 => Err(AlhError::Validation(format!("dilation {l} must be positive"))),
            Generator::Inversion { center, radius } => {
                if *radius <= 0.0 {
                    return Err(AlhError::Validation(format!("inversion radius {radius} must be positive")));
                }
                if center.len() != n {
                    return Err(AlhError::Dimension { expected: n, got: center.len() });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Composition of elementary maps, applied first to last. `domain` and
/// `codomain` say which model the composite maps between.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusIsometry {
    pub dim: usize,
    pub generators: Vec<Generator>,
    pub domain: Model,
    pub codomain: Model,
}

/// The inversion exchanging the two models (sphere of radius √2 about -e_n).
fn cayley_generator(n: usize) -> Generator {
    let mut c = vec![0.0; n];
    c[n - 1] = -1.0;
    Generator::Inversion { center: c, radius: std::f64::consts::SQRT_2 }
}

fn reflection_n(n: usize) -> Generator {
    Generator::Rotation((0..n).map(|i| (0..n).map(|j| if i != j { 0.0 } else if i == n - 1 { -1.0 } else { 1.0 }).collect()).collect())
}

impl MoebiusIsometry {
    pub fn identity(dim: usize, model: Model) -> Self {
        MoebiusIsometry { dim, generators: vec![], domain: model, codomain: model }
    }

    pub fn new(dim: usize, generators: Vec<Generator>, domain: Model, codomain: Model) -> Result<Self> {
        let m = MoebiusIsometry { dim, generators, domain, codomain };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.generators.iter().try_for_each(|g| g.validate(self.dim))
    }

    /// Rotation of the ball model (any orthogonal matrix fixes the origin).
    pub fn ball_rotation(q: Vec<Vec<f64>>) -> Result<Self> {
        let n = q.len();
        Self::new(n, vec![Generator::Rotation(q)], Model::Ball, Model::Ball)
    }

    /// Hyperbolic translation of the ball along the x_n axis by distance
    /// `chi`: the origin goes to tanh(chi/2) e_n.
    pub fn ball_boost(dim: usize, chi: f64) -> Self {
        MoebiusIsometry {
            dim,
            generators: vec![cayley_generator(dim), Generator::Dilation((-chi).exp()), cayley_generator(dim)],
            domain: Model::Ball,
            codomain: Model::Ball,
        }
    }

    pub fn apply_generic<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let mut y = x.to_vec();
        for g in &self.generators {
            y = g.apply(&y);
        }
        y
    }

    pub fn apply(&self, p: &ModelPoint) -> Result<ModelPoint> {
        if p.model != self.domain {
            return domain(format!("isometry acts on {:?}, got {:?}", self.domain, p.model));
        }
        if p.dim() != self.dim {
            return Err(AlhError::Dimension { expected: self.dim, got: p.dim() });
        }
        p.validate()?;
        let y = self.apply_generic(&p.coords);
        let out = ModelPoint { model: self.codomain, coords: y };
        out.validate()?;
        Ok(out)
    }

    pub fn inverse(&self) -> Self {
        MoebiusIsometry {
            dim: self.dim,
            generators: self.generators.iter().rev().map(Generator::inverse).collect(),
            domain: self.codomain,
            codomain: self.domain,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &MoebiusIsometry) -> Result<Self> {
        if self.dim != next.dim {
            return Err(AlhError::Dimension { expected: self.dim, got: next.dim });
        }
        if self.codomain != next.domain {
            return domain("model mismatch in composition");
        }
        let mut generators = self.generators.clone();
        generators.extend(next.generators.iter().cloned());
        Ok(MoebiusIsometry { dim: self.dim, generators, domain: self.domain, codomain: next.codomain })
    }

    /// Exact Jacobian at a point.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let y = self.apply_generic(&Jet::point(x));
        DMatrix::from_fn(self.dim, self.dim, |i, j| y[i].g[j])
    }

    /// max |Jᵀ g_target(Λp) J - g_source(p)|, relative to the size of g_source.
    pub fn pullback_residual(&self, p: &ModelPoint) -> Result<f64> {
        let q = self.apply(p)?;
        let j = self.jacobian(&p.coords);
        let gt = hyperbolic_metric(&q)?;
        let gs = hyperbolic_metric(p)?;
        let scale = gs.amax();
        Ok((j.transpose() * gt * j - &gs).amax() / scale)
    }
}

/// Cayley transform between the models; the same inversion works in both
/// directions.
pub fn cayley(p: &ModelPoint) -> Result<ModelPoint> {
    p.validate()?;
    let y = cayley_generator(p.dim()).apply(&p.coords);
    let out = ModelPoint { model: p.model.other(), coords: y };
    out.validate()?;
    Ok(out)
}

/// The isometry taking the half-space model to the ball so that `h` lands
/// on the equatorial plane {x_n = 0}. `Plus` sends the fat component into
/// the upper hemisphere, `Minus` into the lower one.
pub fn lambda_map(h: &HyperbolicHyperplane, sign: Sign) -> MoebiusIsometry {
    let n = h.dim();
    let mut shift: Vec<f64> = h.center.iter().map(|c| -c).collect();
    shift.push(0.0);
    let mut generators = vec![Generator::Translation(shift), Generator::Dilation(1.0 / h.radius), cayley_generator(n)];
    // After normalisation the apex e_n of the unit half-sphere sits at the
    // ball centre, so the boost parameter 2 atanh(x_n(apex)) is zero and
    // no boost generator is needed; keep the closed form for robustness.
    let mut apex = vec![0.0; n];
    apex[n - 1] = 1.0;
    let a = cayley_generator(n).apply(&apex)[n - 1];
    let chi = 2.0 * a.atanh();
    if chi.abs() > 1e-15 {
        generators.extend(MoebiusIsometry::ball_boost(n, -chi).generators);
    }
    // Inversion sends the outside of the unit half-sphere to x_n < 0.
    if sign == Sign::Plus {
        generators.push(reflection_n(n));
    }
    MoebiusIsometry { dim: n, generators, domain: Model::HalfSpace, codomain: Model::Ball }
}

/// Reflection x_n -> -x_n of the ball, turning a Plus map into a Minus map.
pub fn ball_reflection(n: usize) -> MoebiusIsometry {
    MoebiusIsometry { dim: n, generators: vec![reflection_n(n)], domain: Model::Ball, codomain: Model::Ball }
}

/// The identification Λ2⁻¹ ∘ Λ1 from the h1 chart to the h2 chart.
pub fn glue_transition(l1: &MoebiusIsometry, l2: &MoebiusIsometry) -> Result<MoebiusIsometry> {
    if l1.dim != l2.dim {
        return Err(AlhError::Dimension { expected: l1.dim, got: l2.dim });
    }
    let t = l1.then(&l2.inverse())?;
    Ok(simplify(t))
}

/// Drops a trailing map that cancels the preceding one; keeps the identity
/// transition free of round-off when Λ1 = Λ2.
fn simplify(mut m: MoebiusIsometry) -> MoebiusIsometry {
    let mut out: Vec<Generator> = Vec::with_capacity(m.generators.len());
    for g in m.generators.drain(..) {
        if let Some(last) = out.last() {
            if *last == g.inverse() {
                out.pop();
                continue;
            }
        }
        out.push(g);
    }
    m.generators = out;
    m
}

/// Mirror-symmetric doubling of a field on the annulus ρ ∈ [1/i, 1]:
/// f̂(ρ̂, φ) = f(exp(log i (|ρ̂| - 1)), φ) on ρ̂ ∈ [-1, 1].
pub fn mirror_double<F>(f: F, i: f64) -> Result<impl Fn(f64, f64) -> f64>
where
    F: Fn(f64, f64) -> f64,
{
    if !(i > 1.0) {
        return Err(AlhError::Parameter(format!("neck parameter must exceed 1, got {i}")));
    }
    let li = i.ln();
    Ok(move |rho_hat: f64, phi: f64| f((li * (rho_hat.abs() - 1.0)).exp(), phi))
}

/// Unit direction in the upper half of R^n from n-1 spherical angles.
pub fn upper_direction(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut v = DVector::zeros(n);
    let mut s = 1.0;
    for (k, a) in angles.iter().enumerate() {
        v[k] = s * a.cos();
        s *= a.sin();
    }
    v[n - 1] = s.abs();
    v.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let g = hyperbolic_metric(&ModelPoint::half_space(vec![0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2));
        let g = hyperbolic_metric(&ModelPoint::ball(vec![0.0; 3]).unwrap()).unwrap();
        assert_eq!(g, DMatrix::identity(3, 3) * 4.0);
        let g = hyperbolic_metric(&ModelPoint::ball(vec![0.3, 0.4]).unwrap()).unwrap();
        assert!((g[(0, 0)] - 4.0 / 0.5625).abs() < 1e-13);
        assert!(ModelPoint::ball(vec![0.6, 0.8]).is_err());
        assert!(ModelPoint::half_space(vec![0.6, 0.0]).is_err());
    }

    #[test]
    fn cayley_centre_and_boundary() {
        let p = cayley(&ModelPoint::half_space(vec![0.0, 1.0]).unwrap()).unwrap();
        assert!(p.coords.iter().all(|c| c.abs() < 1e-15));
        assert_eq!(p.model, Model::Ball);
    }

    #[test]
    fn classify_examples() {
        let h = HyperbolicHyperplane::new(vec![0.0], 1.0).unwrap();
        let s = |c: Vec<f64>| classify_side(&h, &ModelPoint::half_space(c).unwrap()).unwrap();
        assert_eq!(s(vec![0.0, 0.5]), Side::Thin);
        assert_eq!(s(vec![0.0, 2.0]), Side::Fat);
        assert_eq!(s(vec![(1.0f64 - 1e-30).sqrt(), 1e-15]), Side::On);
    }

    #[test]
    fn boost_moves_origin() {
        let b = MoebiusIsometry::ball_boost(3, 0.7);
        let y = b.apply(&ModelPoint::ball(vec![0.0; 3]).unwrap()).unwrap();
        assert!((y.coords[2] - (0.35f64).tanh()).abs() < 1e-14);
    }

    #[test]
    fn mirror_examples() {
        let f = mirror_double(|rho, _| rho, 10.0).unwrap();
        assert!((f(0.0, 0.0) - 0.1).abs() < 1e-15);
        assert!((f(1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((f(-0.3, 0.0) - f(0.3, 0.0)).abs() < 1e-15);
        assert!(mirror_double(|r, _| r, 1.0).is_err());
    }
}
