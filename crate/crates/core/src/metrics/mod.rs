//! Chart metrics: Birmingham-Kottler, Horowitz-Myers, the hyperbolic models,
//! plus the curvature engine and orthonormal frames.
//!
//! Metric families are written generically over [`Scalar`] so that the same
//! component code yields exact derivatives when evaluated on jets; that is
//! the "closed-form" path. Metrics given only as `f64` closures go through
//! finite differences.

mod boundary;
mod curvature;
mod frame;

pub use boundary::{Boundary, QuadNode};
pub use curvature::{
    christoffel, christoffel_numeric, curvature, curvature_numeric, einstein_residual, Christoffel, Curvature,
    EinsteinResidual, PointGeometry,
};
pub use frame::{frame_deviation, frame_deviation_jet, on_frame, Frame};

use crate::error::{AlhError, Result};
use crate::jet::{Jet, Scalar, MAXD};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Distance kept from a horizon when declaring the chart domain.
pub const HORIZON_MARGIN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    BK,
    BKSpacetime,
    HMSpatial,
    HMSpacetime,
    HalfSpace,
    Ball,
    FG,
    Custom,
}

impl Family {
    pub fn is_lorentzian(self) -> bool {
        matches!(self, Family::BKSpacetime | Family::HMSpacetime)
    }
}

/// Component evaluation of a metric. Implementors that can also evaluate on
/// jets provide exact derivatives.
pub trait MetricEval: Send + Sync {
    fn dim(&self) -> usize;
    /// Row-major n×n components.
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    fn eval_jet(&self, _x: &[Jet]) -> Option<Vec<Jet>> {
        None
    }
    fn check(&self, _x: &[f64]) -> Result<()> {
        Ok(())
    }
}

/// Metrics written once for any scalar type.
pub trait GenericMetric: Send + Sync {
    fn dim(&self) -> usize;
    fn comps<T: Scalar>(&self, x: &[T]) -> Vec<T>;
    fn check(&self, _x: &[f64]) -> Result<()> {
        Ok(())
    }
}

struct Exact<G>(G);

impl<G: GenericMetric> MetricEval for Exact<G> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.0.comps(x)
    }
    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        Some(self.0.comps(x))
    }
    fn check(&self, x: &[f64]) -> Result<()> {
        self.0.check(x)
    }
}

struct Closure<F>(usize, F);

impl<F: Fn(&[f64]) -> Vec<f64> + Send + Sync> MetricEval for Closure<F> {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.1)(x)
    }
}

/// A coordinate metric on an n-dimensional chart.
#[derive(Clone)]
pub struct ChartMetric {
    pub names: Vec<String>,
    pub family: Family,
    /// Index of the radial coordinate, when the family has one.
    pub radial: Option<usize>,
    inner: Arc<dyn MetricEval>,
}

impl std::fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartMetric").field("names", &self.names).field("family", &self.family).finish()
    }
}

impl ChartMetric {
    pub fn from_generic<G: GenericMetric + 'static>(g: G, names: Vec<String>, family: Family, radial: Option<usize>) -> Self {
        assert!(g.dim() <= MAXD);
        ChartMetric { names, family, radial, inner: Arc::new(Exact(g)) }
    }

    /// A metric known only through `f64` components; curvature goes through
    /// finite differences.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        ChartMetric {
            names: (0..dim).map(|a| format!("x{a}")).collect(),
            family: Family::Custom,
            radial: None,
            inner: Arc::new(Closure(dim, f)),
        }
    }

    /// Same components but with the exact-derivative path hidden, forcing
    /// the finite-difference engine.
    pub fn numeric_only(&self) -> Self {
        let inner = self.inner.clone();
        let mut m = ChartMetric::from_fn(self.dim(), move |x| inner.eval(x));
        m.names = self.names.clone();
        m.family = self.family;
        m.radial = self.radial;
        let check = self.inner.clone();
        m.inner = Arc::new(Checked { eval: m.inner.clone(), check });
        m
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn is_exact(&self) -> bool {
        let x = vec![Jet::constant(1.0); self.dim()];
        self.inner.eval_jet(&x).is_some()
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(AlhError::Dimension { expected: self.dim(), got: x.len() });
        }
        self.inner.check(x)
    }

    pub fn components(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(x)?;
        let n = self.dim();
        Ok(DMatrix::from_row_slice(n, n, &self.inner.eval(x)))
    }

    pub(crate) fn raw(&self, x: &[f64]) -> Vec<f64> {
        self.inner.eval(x)
    }

    pub(crate) fn raw_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        self.inner.eval_jet(x)
    }
}

struct Checked {
    eval: Arc<dyn MetricEval>,
    check: Arc<dyn MetricEval>,
}

impl MetricEval for Checked {
    fn dim(&self) -> usize {
        self.eval.dim()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.eval.eval(x)
    }
    fn check(&self, x: &[f64]) -> Result<()> {
        self.check.check(x)
    }
}

fn diag<T: Scalar>(d: &[T]) -> Vec<T> {
    let n = d.len();
    let mut out = vec![T::cst(0.0); n * n];
    for a in 0..n {
        out[a * n + a] = d[a];
    }
    out
}

/// Parameters of the Birmingham-Kottler family
/// g = dr²/f + r² h_k, f = r² + k - 2 m_c / r^{n-2}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BKParams {
    pub n: usize,
    pub k: i32,
    pub m_c: f64,
    pub boundary: Boundary,
}

impl BKParams {
    pub fn new(n: usize, k: i32, m_c: f64, boundary: Boundary) -> Result<Self> {
        if n < 2 || n + 1 > MAXD {
            return Err(AlhError::Parameter(format!("space dimension {n} outside 2..={}", MAXD - 1)));
        }
        if !(-1..=1).contains(&k) {
            return Err(AlhError::Parameter(format!("k must be in {{-1,0,1}}, got {k}")));
        }
        if boundary.dim() != n - 1 {
            return Err(AlhError::Dimension { expected: n - 1, got: boundary.dim() });
        }
        // A circle is an Einstein manifold for every k.
        if n > 2 && boundary.k() != k {
            return Err(AlhError::Parameter(format!("boundary curvature {} does not match k = {k}", boundary.k())));
        }
        if !m_c.is_finite() {
            return Err(AlhError::Parameter("m_c must be finite".into()));
        }
        Ok(BKParams { n, k, m_c, boundary })
    }

    /// Default boundary for the given k: unit flat torus, round sphere, or a
    /// hyperbolic disc of area 4π.
    pub fn with_default_boundary(n: usize, k: i32, m_c: f64) -> Result<Self> {
        let d = n.saturating_sub(1).max(1);
        let boundary = if n == 2 {
            Boundary::flat_torus(vec![2.0 * PI])
        } else {
            match k {
                0 => Boundary::flat_torus(vec![1.0; d]),
                1 => Boundary::RoundSphere { dim: d },
                _ => Boundary::HyperbolicBall { dim: d, area: 4.0 * PI },
            }
        };
        Self::new(n, k, m_c, boundary)
    }

    pub fn f<T: Scalar>(&self, r: T) -> T {
        r * r + self.k as f64 - r.powi(2 - self.n as i32) * (2.0 * self.m_c)
    }

    pub fn f_prime(&self, r: f64) -> f64 {
        2.0 * r + 2.0 * (self.n as f64 - 2.0) * self.m_c * r.powi(1 - self.n as i32)
    }

    fn domain_check(&self, r: f64) -> Result<()> {
        if !(r > 0.0) {
            return Err(AlhError::Domain(format!("r = {r} must be positive")));
        }
        if let Some(h) = horizon_radius(self) {
            if r <= h.r0 + HORIZON_MARGIN {
                return Err(AlhError::Singularity(format!("r = {r} not outside horizon r0 = {}", h.r0)));
            }
        }
        if self.f(r) <= 0.0 {
            return Err(AlhError::Singularity(format!("f(r) = {} <= 0 at r = {r}", self.f(r))));
        }
        Ok(())
    }
}

/// Parameters of the Horowitz-Myers soliton
/// g = dr²/F + F dψ² + r² δ_ab dθ^a dθ^b, F = r² - 2 m_c / r^{n-2}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HMParams {
    pub n: usize,
    pub m_c: f64,
    pub psi_period: f64,
    pub theta_periods: Vec<f64>,
}

impl HMParams {
    /// Smooth soliton with the boundary torus dψ² + δ normalised to unit area.
    pub fn new(n: usize, m_c: f64) -> Result<Self> {
        if n < 2 || n + 1 > MAXD {
            return Err(AlhError::Parameter(format!("space dimension {n} outside 2..={}", MAXD - 1)));
        }
        if !(m_c > 0.0) {
            return Err(AlhError::Parameter(format!("HM needs m_c > 0, got {m_c}")));
        }
        let psi_period = hm_psi_period(n, m_c);
        let l = if n > 2 { psi_period.powf(-1.0 / (n as f64 - 2.0)) } else { 1.0 };
        Ok(HMParams { n, m_c, psi_period, theta_periods: vec![l; n - 2] })
    }

    /// Explicit periods; m_c = 0 allowed (then the metric is the k = 0
    /// hyperbolic background).
    pub fn with_periods(n: usize, m_c: f64, psi_period: f64, theta_periods: Vec<f64>) -> Result<Self> {
        if theta_periods.len() + 2 != n || !(psi_period > 0.0) || m_c < 0.0 {
            return Err(AlhError::Parameter("invalid HM periods".into()));
        }
        Ok(HMParams { n, m_c, psi_period, theta_periods })
    }

    pub fn r0(&self) -> f64 {
        (2.0 * self.m_c).powf(1.0 / self.n as f64)
    }

    pub fn big_f<T: Scalar>(&self, r: T) -> T {
        r * r - r.powi(2 - self.n as i32) * (2.0 * self.m_c)
    }

    /// Area of the boundary torus dψ² + δ.
    pub fn boundary_area(&self) -> f64 {
        self.psi_period * self.theta_periods.iter().product::<f64>()
    }

    /// The boundary torus (ψ, θ) as a flat torus.
    pub fn boundary(&self) -> Boundary {
        let mut p = vec![self.psi_period];
        p.extend(&self.theta_periods);
        Boundary::flat_torus(p)
    }

    fn domain_check(&self, r: f64) -> Result<()> {
        if !(r > 0.0) || r <= self.r0() + HORIZON_MARGIN {
            return Err(AlhError::Singularity(format!("r = {r} not above r0 = {}", self.r0())));
        }
        Ok(())
    }
}

/// ψ-period removing the conical singularity at r0 = (2 m_c)^{1/n}.
pub fn hm_psi_period(n: usize, m_c: f64) -> f64 {
    let r0 = (2.0 * m_c).powf(1.0 / n as f64);
    // F'(r0) = 2 r0 + 2(n-2) m_c / r0^{n-1} = n r0
    let fp = 2.0 * r0 + 2.0 * (n as f64 - 2.0) * m_c * r0.powi(1 - n as i32);
    4.0 * PI / fp.abs()
}

struct BkGeneric {
    p: BKParams,
    spacetime: bool,
}

impl GenericMetric for BkGeneric {
    fn dim(&self) -> usize {
        self.p.n + self.spacetime as usize
    }
    fn comps<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let o = self.spacetime as usize;
        let r = x[o];
        let f = self.p.f(r);
        let mut d = Vec::with_capacity(self.dim());
        if self.spacetime {
            d.push(-f);
        }
        d.push(f.recip());
        let h = self.p.boundary.diag(&x[o + 1..]);
        d.extend(h.into_iter().map(|hi| hi * r * r));
        diag(&d)
    }
    fn check(&self, x: &[f64]) -> Result<()> {
        self.p.domain_check(x[self.spacetime as usize])?;
        self.p.boundary.check(&x[self.spacetime as usize + 1..])
    }
}

struct HmGeneric {
    p: HMParams,
    spacetime: bool,
}

impl GenericMetric for HmGeneric {
    fn dim(&self) -> usize {
        self.p.n + self.spacetime as usize
    }
    fn comps<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let o = self.spacetime as usize;
        let r = x[o];
        let f = self.p.big_f(r);
        let mut d = Vec::with_capacity(self.dim());
        if self.spacetime {
            d.push(-(r * r));
        }
        d.push(f.recip());
        d.push(f);
        for _ in 0..self.p.n - 2 {
            d.push(r * r);
        }
        diag(&d)
    }
    fn check(&self, x: &[f64]) -> Result<()> {
        if self.p.m_c > 0.0 {
            self.p.domain_check(x[self.spacetime as usize])
        } else if x[self.spacetime as usize] > 0.0 {
            Ok(())
        } else {
            Err(AlhError::Domain("r must be positive".into()))
        }
    }
}

struct HyperbolicModel {
    n: usize,
    ball: bool,
}

impl GenericMetric for HyperbolicModel {
    fn dim(&self) -> usize {
        self.n
    }
    fn comps<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let c = if self.ball {
            let mut r2 = T::cst(0.0);
            for v in x {
                r2 = r2 + *v * *v;
            }
            let d = T::cst(1.0) - r2;
            (d * d).recip() * 4.0
        } else {
            let z = x[self.n - 1];
            (z * z).recip()
        };
        diag(&vec![c; self.n])
    }
    fn check(&self, x: &[f64]) -> Result<()> {
        let ok = if self.ball { x.iter().map(|v| v * v).sum::<f64>() < 1.0 } else { x[self.n - 1] > 0.0 };
        if ok {
            Ok(())
        } else {
            Err(AlhError::Domain(format!("{x:?} outside hyperbolic model")))
        }
    }
}

fn names(prefix: &[&str], rest: &str, count: usize) -> Vec<String> {
    let mut v: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    v.extend((1..=count).map(|i| format!("{rest}{i}")));
    v
}

/// Spatial BK metric in coordinates (r, y¹..y^{n-1}).
pub fn bk_spatial(p: &BKParams) -> ChartMetric {
    ChartMetric::from_generic(BkGeneric { p: p.clone(), spacetime: false }, names(&["r"], "y", p.n - 1), Family::BK, Some(0))
}

/// BK spacetime -f dt² + dr²/f + r² h_k in coordinates (t, r, y...).
pub fn bk_spacetime(p: &BKParams) -> ChartMetric {
    ChartMetric::from_generic(
        BkGeneric { p: p.clone(), spacetime: true },
        names(&["t", "r"], "y", p.n - 1),
        Family::BKSpacetime,
        Some(1),
    )
}

/// The m_c = 0 background with the same k and boundary.
pub fn bk_background(p: &BKParams) -> ChartMetric {
    let mut q = p.clone();
    q.m_c = 0.0;
    bk_spatial(&q)
}

/// Spatial HM metric in coordinates (r, ψ, θ¹..θ^{n-2}).
pub fn hm_spatial(p: &HMParams) -> ChartMetric {
    ChartMetric::from_generic(
        HmGeneric { p: p.clone(), spacetime: false },
        names(&["r", "psi"], "theta", p.n - 2),
        Family::HMSpatial,
        Some(0),
    )
}

/// HM spacetime -r² dt² + HM spatial, coordinates (t, r, ψ, θ...).
pub fn hm_spacetime(p: &HMParams) -> ChartMetric {
    ChartMetric::from_generic(
        HmGeneric { p: p.clone(), spacetime: true },
        names(&["t", "r", "psi"], "theta", p.n - 2),
        Family::HMSpacetime,
        Some(1),
    )
}

/// The k = 0, m_c = 0 background on the HM boundary torus, sharing the HM
/// chart (r, ψ, θ).
pub fn hm_background(p: &HMParams) -> ChartMetric {
    let q = HMParams { m_c: 0.0, ..p.clone() };
    let mut m = hm_spatial(&q);
    m.family = Family::BK;
    m
}

pub fn half_space(n: usize) -> ChartMetric {
    let mut nm = names(&[], "w", n - 1);
    nm.push("z".into());
    ChartMetric::from_generic(HyperbolicModel { n, ball: false }, nm, Family::HalfSpace, None)
}

pub fn ball(n: usize) -> ChartMetric {
    ChartMetric::from_generic(HyperbolicModel { n, ball: true }, names(&[], "x", n), Family::Ball, None)
}

/// Largest positive root of f and whether it is of first order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub r0: f64,
    pub first_order: bool,
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        if b - a < 1e-14 * b {
            break;
        }
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Largest positive zero of f(r) = r² + k - 2 m_c / r^{n-2}.
pub fn horizon_radius(p: &BKParams) -> Option<Horizon> {
    let f = |r: f64| p.f(r);
    // Beyond this radius f is certainly positive.
    let mut hi = 2.0 + (2.0 * p.m_c.abs()).powf(1.0 / p.n as f64) + (p.k.abs() as f64);
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    // Scan downwards on a geometric grid for the last sign change.
    let steps = 4000;
    let lo = 1e-8;
    let ratio = (lo / hi).powf(1.0 / steps as f64);
    let mut r_prev = hi;
    let mut f_prev = f(hi);
    let mut bracket = None;
    let mut touch = None;
    let mut f_prev2 = f64::INFINITY;
    for _ in 0..steps {
        let r = r_prev * ratio;
        let fr = f(r);
        if fr <= 0.0 && f_prev > 0.0 {
            bracket = Some((r, r_prev));
            break;
        }
        // Local minimum of f > 0: refine to detect a double root.
        if touch.is_none() && f_prev < f_prev2 && f_prev <= fr && r_prev > 1e-4 {
            let rm = golden_min(&f, r, r_prev / ratio);
            if f(rm).abs() < 1e-10 {
                touch = Some(rm);
            }
        }
        f_prev2 = f_prev;
        r_prev = r;
        f_prev = fr;
    }
    let (mut a, mut b) = match bracket {
        Some(ab) => ab,
        None => {
            let r0 = touch?;
            return Some(Horizon { r0, first_order: false });
        }
    };
    for _ in 0..200 {
        if b - a <= 1e-15 * b.max(1.0) {
            break;
        }
        let m = 0.5 * (a + b);
        if f(m) <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let r0 = if f(a) == 0.0 { a } else { 0.5 * (a + b) };
    Some(Horizon { r0, first_order: p.f_prime(r0).abs() >= 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_examples() {
        let p = BKParams::with_default_boundary(3, 0, 0.5).unwrap();
        let h = horizon_radius(&p).unwrap();
        assert!((h.r0 - 1.0).abs() < 1e-12 && h.first_order);
        assert!(horizon_radius(&BKParams::with_default_boundary(3, 0, 0.0).unwrap()).is_none());
        assert!(horizon_radius(&BKParams::with_default_boundary(4, 1, 0.0).unwrap()).is_none());
        let p = BKParams::with_default_boundary(2, 0, 2.0).unwrap();
        assert!((horizon_radius(&p).unwrap().r0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hm_period_and_area() {
        for n in 3..=5 {
            let p = HMParams::new(n, 1.0).unwrap();
            let r0 = p.r0();
            assert!((p.psi_period - 4.0 * PI / (n as f64 * r0)).abs() < 1e-12);
            assert!((p.boundary_area() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hm_massless_equals_background() {
        let p = HMParams::with_periods(4, 0.0, 1.0, vec![1.0, 1.0]).unwrap();
        let b = BKParams::new(4, 0, 0.0, Boundary::flat_torus(vec![1.0; 3])).unwrap();
        let x = [3.0, 0.1, 0.2, 0.3];
        assert_eq!(hm_spatial(&p).components(&x).unwrap(), bk_spatial(&b).components(&x).unwrap());
    }
}
