//! Conformal rescaling of the boundary metric h̊ ↦ φ²h̊ and its effect on the
//! Fefferman-Graham expansion: new defining function and boundary
//! coordinates, the induced k̄, the obstruction to keeping the standard
//! form, and the transformation of the mass aspect in n = 3 and n = 4.
//!
//! Boundaries are flat: either a torus (derivatives by FFT) or a box in R^d
//! (exact jets for orders one and two, fourth-order stencils for order three).

mod formulas;
mod shoot;
mod spectral;

pub use formulas::{
    c_correction, condition_tensor, expansion_at, kbar_at, kbar_closed_form_n4, mu_bar_n4, trace_simp3, LocalData,
};
pub use shoot::{
    default_x_ladder, gauge_expansion_check, geodesic_gauge_shoot, GaugeExpansionReport, GaugeRay, GaugeSample, FGMetric, TensorField,
};
pub use spectral::TorusSpectrum;

use crate::error::{AlhError, Result};
use crate::jet::{Jet, Scalar, MAXD};
use crate::mass::MassAspect;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Flat boundary on which φ lives.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryGeometry {
    /// Π [0, L_a) with periodic identification.
    FlatTorus { periods: Vec<f64> },
    /// The box Π [lo_a, hi_a] in a flat chart.
    FlatChart { lo: Vec<f64>, hi: Vec<f64> },
}

impl BoundaryGeometry {
    pub fn dim(&self) -> usize {
        match self {
            BoundaryGeometry::FlatTorus { periods } => periods.len(),
            BoundaryGeometry::FlatChart { lo, .. } => lo.len(),
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, BoundaryGeometry::FlatTorus { .. })
    }
}

/// One term a cos(w·x + θ) of the exponent u = log φ.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigMode {
    pub wave: Vec<f64>,
    pub amp: f64,
    pub phase: f64,
}

pub type JetFn = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;

/// The rescaling factor φ > 0 (ψ = 1/φ).
#[derive(Clone)]
pub enum ConformalFactor {
    Constant(f64),
    /// φ = exp Σ a cos(w·x + θ).
    ExpTrig(Vec<TrigMode>),
    /// φ = 1/(a|x|² + b·x + c); φ²δ has constant curvature 4ac - |b|².
    Quadric { a: f64, b: Vec<f64>, c: f64 },
    /// φ = e^{ω_*/2} with ω_* the hyperbolic neck profile around `center`.
    Neck { i: f64, center: Vec<f64> },
    Custom(JetFn),
}

impl fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformalFactor::Constant(c) => write!(f, "Constant({c})"),
            ConformalFactor::ExpTrig(m) => write!(f, "ExpTrig({m:?})"),
            ConformalFactor::Quadric { a, b, c } => write!(f, "Quadric {{ a: {a}, b: {b:?}, c: {c} }}"),
            ConformalFactor::Neck { i, center } => write!(f, "Neck {{ i: {i}, center: {center:?} }}"),
            ConformalFactor::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl ConformalFactor {
    /// Random smooth periodic factor: `modes` terms with integer wave numbers
    /// up to `max_freq` per axis and amplitudes in [-amp, amp].
    pub fn random_exp_trig(periods: &[f64], modes: usize, max_freq: i32, amp: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = (0..modes)
            .map(|_| {
                let mut wave: Vec<f64> = periods
                    .iter()
                    .map(|l| 2.0 * PI * rng.gen_range(-max_freq..=max_freq) as f64 / l)
                    .collect();
                if wave.iter().all(|w| *w == 0.0) {
                    wave[0] = 2.0 * PI / periods[0];
                }
                TrigMode { wave, amp: rng.gen_range(-amp..=amp), phase: rng.gen_range(0.0..2.0 * PI) }
            })
            .collect();
        ConformalFactor::ExpTrig(terms)
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let v = match self {
            ConformalFactor::Constant(c) => T::cst(*c),
            ConformalFactor::ExpTrig(modes) => {
                let mut u = T::cst(0.0);
                for m in modes {
                    let mut arg = T::cst(m.phase);
                    for (xa, w) in x.iter().zip(&m.wave) {
                        arg = arg + *xa * *w;
                    }
                    u = u + arg.cos() * m.amp;
                }
                u.exp()
            }
            ConformalFactor::Quadric { a, b, c } => {
                let mut q = T::cst(*c);
                for (xa, ba) in x.iter().zip(b) {
                    q = q + *xa * *xa * *a + *xa * *ba;
                }
                q.recip()
            }
            ConformalFactor::Neck { i, center } => {
                let mut r2 = T::cst(0.0);
                for (xa, ca) in x.iter().zip(center) {
                    let d = *xa - *ca;
                    r2 = r2 + d * d;
                }
                let rho = r2.sqrt().re();
                crate::yamabe::neck_omega(*i, rho)?;
                (crate::yamabe::neck_generic(*i, r2.sqrt()) * 0.5).exp()
            }
            ConformalFactor::Custom(_) => {
                return Err(AlhError::Feature("custom factors are evaluated on jets only".into()));
            }
        };
        Ok(v)
    }

    /// φ with exact gradient and Hessian at x.
    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        let p = Jet::point(x);
        let j = match self {
            ConformalFactor::Custom(f) => f(&p),
            _ => self.eval(&p)?,
        };
        if !(j.v > 0.0 && j.v.is_finite()) {
            return Err(AlhError::Domain(format!("φ = {} is not positive at {x:?}", j.v)));
        }
        Ok(j)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            ConformalFactor::Custom(_) => Ok(self.jet(x)?.v),
            _ => self.eval(x),
        }
    }
}

/// Boundary data for a conformal rescaling h̄ = φ²h̊ of a flat boundary.
#[derive(Clone, Debug)]
pub struct BoundaryConformalData {
    pub geometry: BoundaryGeometry,
    /// Sectional sign of h̊ (zero for the flat geometries).
    pub k: f64,
    pub phi: ConformalFactor,
    /// Sample points per axis.
    pub resolution: usize,
}

/// Step of the stencils used for third derivatives off the torus.
const STENCIL_STEP: f64 = 1e-3;

impl BoundaryConformalData {
    pub fn new(geometry: BoundaryGeometry, phi: ConformalFactor, resolution: usize) -> Result<Self> {
        let d = geometry.dim();
        if d == 0 || d > MAXD {
            return Err(AlhError::Parameter(format!("boundary dimension {d} outside 1..={MAXD}")));
        }
        if resolution < 4 {
            return Err(AlhError::Parameter("resolution must be at least 4".into()));
        }
        match &geometry {
            BoundaryGeometry::FlatTorus { periods } => {
                if periods.iter().any(|l| !(*l > 0.0)) {
                    return Err(AlhError::Parameter("torus periods must be positive".into()));
                }
                if resolution % 2 == 1 {
                    return Err(AlhError::Parameter("torus resolution must be even".into()));
                }
            }
            BoundaryGeometry::FlatChart { lo, hi } => {
                if hi.len() != d || lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
                    return Err(AlhError::Parameter("chart box must satisfy lo < hi".into()));
                }
            }
        }
        let data = BoundaryConformalData { geometry, k: 0.0, phi, resolution };
        for x in data.nodes() {
            data.phi.jet(&x)?;
        }
        Ok(data)
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n != self.dim() + 1 {
            return Err(AlhError::Dimension { expected: self.dim() + 1, got: n });
        }
        Ok(())
    }

    /// Sample points: torus lattice, or cell midpoints of the box.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let m = self.resolution;
        let count = m.pow(d as u32);
        (0..count)
            .map(|idx| {
                (0..d)
                    .map(|a| {
                        let j = (idx / m.pow((d - 1 - a) as u32)) % m;
                        match &self.geometry {
                            BoundaryGeometry::FlatTorus { periods } => periods[a] * j as f64 / m as f64,
                            BoundaryGeometry::FlatChart { lo, hi } => lo[a] + (hi[a] - lo[a]) * (j as f64 + 0.5) / m as f64,
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Quadrature weight of each node for dμ_h̊.
    pub fn cell_volume(&self) -> f64 {
        let m = self.resolution as f64;
        match &self.geometry {
            BoundaryGeometry::FlatTorus { periods } => periods.iter().map(|l| l / m).product(),
            BoundaryGeometry::FlatChart { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (b - a) / m).product(),
        }
    }

    /// Derivatives of φ (orders ≤ 2 exact) and of u = log φ (order 3 by stencils).
    pub fn local(&self, x: &[f64]) -> Result<LocalData> {
        let d = self.dim();
        let j = self.phi.jet(x)?;
        let mut l = LocalData::from_jet(d, &j);
        let hess_u = |y: &[f64]| -> Result<DMatrix<f64>> {
            let ju = self.phi.jet(y)?.ln();
            Ok(DMatrix::from_fn(d, d, |a, b| ju.h[a][b]))
        };
        let h = STENCIL_STEP;
        let mut d3 = vec![0.0; d * d * d];
        for c in 0..d {
            let shifted = |s: f64| -> Result<DMatrix<f64>> {
                let mut y = x.to_vec();
                y[c] += s * h;
                hess_u(&y)
            };
            let dh = (shifted(-2.0)? - shifted(-1.0)? * 8.0 + shifted(1.0)? * 8.0 - shifted(2.0)?) / (12.0 * h);
            for a in 0..d {
                for b in 0..d {
                    d3[(c * d + a) * d + b] = dh[(a, b)];
                }
            }
        }
        l.d3u = Some(d3);
        Ok(l)
    }

    /// Local data at every node: spectral on tori, jets and stencils on charts.
    pub fn grid(&self) -> Result<Vec<LocalData>> {
        let d = self.dim();
        let nodes = self.nodes();
        match &self.geometry {
            BoundaryGeometry::FlatChart { .. } => nodes.iter().map(|x| self.local(x)).collect(),
            BoundaryGeometry::FlatTorus { periods } => {
                let m = self.resolution;
                let phi: Vec<f64> = nodes.iter().map(|x| self.phi.value(x)).collect::<Result<_>>()?;
                let u: Vec<f64> = phi.iter().map(|p| p.ln()).collect();
                let sp = TorusSpectrum::new(&phi, m, periods);
                let su = TorusSpectrum::new(&u, m, periods);
                let unit = |ids: &[usize]| {
                    let mut a = vec![0usize; d];
                    for &i in ids {
                        a[i] += 1;
                    }
                    a
                };
                let d1: Vec<Vec<f64>> = (0..d).map(|a| sp.derivative(&unit(&[a]))).collect();
                let mut d2 = vec![Vec::new(); d * d];
                for a in 0..d {
                    for b in a..d {
                        let v = sp.derivative(&unit(&[a, b]));
                        d2[b * d + a] = v.clone();
                        d2[a * d + b] = v;
                    }
                }
                let mut d3 = vec![Vec::new(); d * d * d];
                for a in 0..d {
                    for b in a..d {
                        for c in b..d {
                            let v = su.derivative(&unit(&[a, b, c]));
                            for (p, q, r) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                                d3[(p * d + q) * d + r] = v.clone();
                            }
                        }
                    }
                }
                Ok((0..nodes.len())
                    .map(|i| LocalData {
                        dim: d,
                        phi: phi[i],
                        dphi: DVector::from_fn(d, |a, _| d1[a][i]),
                        ddphi: DMatrix::from_fn(d, d, |a, b| d2[a * d + b][i]),
                        riemann: vec![0.0; d * d * d * d],
                        d3u: Some((0..d * d * d).map(|t| d3[t][i]).collect()),
                    })
                    .collect())
            }
        }
    }

    /// Tangential mass aspect sampled at the nodes, in the gauge μ_ri = 0
    /// (frame components, radial index last).
    pub fn mass_aspect<F: Fn(&[f64]) -> DMatrix<f64>>(&self, n: usize, mu: F) -> Result<MassAspect> {
        self.check_n(n)?;
        let d = self.dim();
        let w = self.cell_volume();
        let mut out = MassAspect { n, weights: Vec::new(), mu: Vec::new() };
        for x in self.nodes() {
            let t = mu(&x);
            if t.nrows() != d || t.ncols() != d {
                return Err(AlhError::Dimension { expected: d, got: t.nrows() });
            }
            let mut full = DMatrix::zeros(n, n);
            full.view_mut((0, 0), (d, d)).copy_from(&t);
            out.mu.push(full);
            out.weights.push(w);
        }
        Ok(out)
    }
}

/// Coefficients of y = φx(1 + Σ φ_j x^j) and x̄^A = x^A + Σ φ_j^A x^j at the nodes.
#[derive(Clone, Debug)]
pub struct ExpansionCoefficients {
    pub nodes: Vec<Vec<f64>>,
    /// phi[j-1][node] = φ_j.
    pub phi: [Vec<f64>; 5],
    /// phi_a[j-1][node][A] = φ_j^A.
    pub phi_a: [Vec<Vec<f64>>; 5],
}

pub fn expansion_coefficients(data: &BoundaryConformalData, n: usize) -> Result<ExpansionCoefficients> {
    data.check_n(n)?;
    let grid = data.grid()?;
    let d = data.dim();
    let mut phi: [Vec<f64>; 5] = Default::default();
    let mut phi_a: [Vec<Vec<f64>>; 5] = Default::default();
    for l in &grid {
        let kb = kbar_at(n, data.k, l);
        let e = expansion_at(kb, l);
        for j in 0..5 {
            phi[j].push(e.0[j]);
            phi_a[j].push(if j == 1 || j == 3 { e.1[j].clone() } else { vec![0.0; d] });
        }
    }
    Ok(ExpansionCoefficients { nodes: data.nodes(), phi, phi_a })
}

/// k̄ = R̄/((n-1)(n-2)) of φ²h̊ at the nodes.
#[derive(Clone, Debug)]
pub struct KbarField {
    pub values: Vec<f64>,
    pub mean: f64,
    /// max - min over the nodes.
    pub spread: f64,
    /// The constant in {0, ±1} when the field is one within 1e-8.
    pub constant: Option<i32>,
    /// Set when k̄ is not constant, i.e. φ²h̊ is not a space form.
    pub obstruction: Option<String>,
}

pub fn kbar(data: &BoundaryConformalData, n: usize) -> Result<KbarField> {
    data.check_n(n)?;
    if n < 3 {
        return Err(AlhError::Parameter("k̄ needs n ≥ 3".into()));
    }
    let values: Vec<f64> = data.grid()?.iter().map(|l| kbar_at(n, data.k, l)).collect();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = max - min;
    let near = mean.round();
    let constant = (spread < 1e-8 && (mean - near).abs() < 1e-8 && near.abs() <= 1.0).then_some(near as i32);
    let obstruction = constant
        .is_none()
        .then(|| format!("k̄ ranges over [{min:.6e}, {max:.6e}]; φ²h̊ is not of constant curvature in {{0, ±1}}"));
    Ok(KbarField { values, mean, spread, constant, obstruction })
}

/// Max-norm over the nodes of the order-y⁰ obstruction tensor, with k̄ taken
/// pointwise from the scalar-curvature law (so only the tracefree part remains).
pub fn obstruction_residual(data: &BoundaryConformalData, n: usize) -> Result<f64> {
    data.check_n(n)?;
    if n < 3 {
        return Err(AlhError::Parameter("obstruction needs n ≥ 3".into()));
    }
    let mut worst = 0.0f64;
    for l in data.grid()? {
        let kb = kbar_at(n, data.k, &l);
        worst = worst.max(condition_tensor(data.k, kb, &l).amax());
    }
    Ok(worst)
}

fn check_gauge(mu: &MassAspect, n: usize, nodes: usize) -> Result<()> {
    if mu.n != n {
        return Err(AlhError::Dimension { expected: n, got: mu.n });
    }
    if mu.mu.len() != nodes {
        return Err(AlhError::Dimension { expected: nodes, got: mu.mu.len() });
    }
    for m in &mu.mu {
        let scale = m.amax().max(1.0);
        for a in 0..n {
            if m[(a, n - 1)].abs() > 1e-12 * scale || m[(n - 1, a)].abs() > 1e-12 * scale {
                return Err(AlhError::Validation("mass aspect must satisfy the gauge μ_ri = 0".into()));
            }
        }
    }
    Ok(())
}

/// Pointwise defect between the trace of the n = 4 transformation law and its
/// simplified form in u = log φ.
pub fn mass_aspect_trace_defect(data: &BoundaryConformalData, mu: &MassAspect) -> Result<f64> {
    let n = 4;
    data.check_n(n)?;
    let grid = data.grid()?;
    check_gauge(mu, n, grid.len())?;
    let mut worst = 0.0f64;
    for (l, m) in grid.iter().zip(&mu.mu) {
        let t = m.view((0, 0), (3, 3)).into_owned();
        let kb = kbar_at(n, data.k, l);
        let lhs = mu_bar_n4(data.k, kb, l, &t).trace() - t.trace();
        let rhs = trace_simp3(data.k, l);
        worst = worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
    }
    Ok(worst)
}

/// μ̄ of the rescaled boundary: ψμ for n = 3, the full fourth-order law for
/// n = 4 (whose trace is cross-checked against the u-form to 1e-8).
pub fn transform_mass_aspect(data: &BoundaryConformalData, mu: &MassAspect, n: usize) -> Result<MassAspect> {
    if n != 3 && n != 4 {
        return Err(AlhError::Feature(format!("no mass-aspect transformation law for n = {n}")));
    }
    data.check_n(n)?;
    let grid = data.grid()?;
    check_gauge(mu, n, grid.len())?;
    let d = n - 1;
    if n == 4 {
        let defect = mass_aspect_trace_defect(data, mu)?;
        if defect > 1e-8 {
            return Err(AlhError::Validation(format!("trace identity of the n = 4 law fails by {defect:e}")));
        }
    }
    let mut out = MassAspect { n, weights: Vec::new(), mu: Vec::new() };
    for ((l, m), w) in grid.iter().zip(&mu.mu).zip(&mu.weights) {
        let t = m.view((0, 0), (d, d)).into_owned();
        let bar = if n == 3 {
            t / l.phi
        } else {
            let kb = kbar_at(n, data.k, l);
            mu_bar_n4(data.k, kb, l, &t) / (l.phi * l.phi)
        };
        let mut full = DMatrix::zeros(n, n);
        full.view_mut((0, 0), (d, d)).copy_from(&bar);
        out.mu.push(full);
        // √det h̄ = φ^d √det h̊ and x̄^A = x^A on the boundary
        out.weights.push(w * l.phi.powi(d as i32));
    }
    Ok(out)
}

/// Two routes to the total mass-aspect trace after rescaling.
///
/// lhs = ∫ h̄^{AB} μ̄_AB √det h̄ evaluated in the barred frame;
/// rhs = ∫ φ⁻¹ h̊^{AB}μ_AB √det h̊ (n = 3) or ∫ e^{-u}(μ^A_A + C) √det h̊ (n = 4,
/// closed boundary only, as it rests on an integration by parts).
pub fn aspect_integral_identity(data: &BoundaryConformalData, mu: &MassAspect, n: usize) -> Result<(f64, f64)> {
    if n == 4 && !data.geometry.is_closed() {
        return Err(AlhError::Domain("the n = 4 identity needs a closed boundary".into()));
    }
    let bar = transform_mass_aspect(data, mu, n)?;
    let grid = data.grid()?;
    let d = n - 1;
    let cell = data.cell_volume();
    let mut lhs = Vec::with_capacity(grid.len());
    let mut rhs = Vec::with_capacity(grid.len());
    for ((l, m), mb) in grid.iter().zip(&mu.mu).zip(&bar.mu) {
        let hbar = DMatrix::<f64>::identity(d, d) * (l.phi * l.phi);
        let hinv = hbar.clone().try_inverse().ok_or_else(|| AlhError::Singularity("h̄".into()))?;
        let mbt = mb.view((0, 0), (d, d)).into_owned();
        lhs.push(cell * (hinv * mbt).trace() * hbar.determinant().sqrt());
        let tr = m.view((0, 0), (d, d)).trace();
        rhs.push(if n == 3 { cell * tr / l.phi } else { cell * (tr + c_correction(data.k, l)?) / l.phi });
    }
    Ok((crate::quad::pairwise_sum(&lhs), crate::quad::pairwise_sum(&rhs)))
}

/// r = 1/x - kx/4.
pub fn r_from_x(x: f64, k: f64) -> Result<f64> {
    let top = if k == 0.0 { f64::INFINITY } else { 2.0 / k.abs().sqrt() };
    if !(x > 0.0 && x < top) {
        return Err(AlhError::Domain(format!("x = {x} outside (0, {top})")));
    }
    Ok(1.0 / x - k * x / 4.0)
}

/// x = 2/(r + √(r² + k)), the inverse of [`r_from_x`].
pub fn x_from_r(r: f64, k: f64) -> Result<f64> {
    let floor = (-k).max(0.0).sqrt();
    if !(r > floor) || !r.is_finite() {
        return Err(AlhError::Domain(format!("r = {r} must exceed {floor}")));
    }
    Ok(2.0 / (r + (r * r + k).sqrt()))
}

/// Converts between the main-text radius and the Fefferman-Graham coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartValue {
    R(f64),
    X(f64),
}

pub fn chart_convert(v: ChartValue, k: f64) -> Result<ChartValue> {
    match v {
        ChartValue::R(r) => Ok(ChartValue::X(x_from_r(r, k)?)),
        ChartValue::X(x) => Ok(ChartValue::R(r_from_x(x, k)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(d: usize, seed: u64, m: usize) -> BoundaryConformalData {
        let periods = vec![1.0; d];
        let phi = ConformalFactor::random_exp_trig(&periods, 3, 2, 0.15, seed);
        BoundaryConformalData::new(BoundaryGeometry::FlatTorus { periods }, phi, m).unwrap()
    }

    #[test]
    fn chart_examples() {
        assert!((x_from_r(1.0, 1.0).unwrap() - 2.0 / (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(x_from_r(4.0, 0.0).unwrap(), 0.25);
        for k in [-1.0, 0.0, 1.0] {
            for j in 0..100 {
                let r = 1.5 + j as f64 * 0.37;
                let back = r_from_x(x_from_r(r, k).unwrap(), k).unwrap();
                assert!((back - r).abs() <= 1e-14 * r);
            }
        }
        assert!(x_from_r(0.5, -1.0).is_err());
        assert!(r_from_x(-0.1, 0.0).is_err());
    }

    #[test]
    fn sine_exponent_phi2() {
        let wave = vec![2.0 * PI, 0.0];
        let phi = ConformalFactor::ExpTrig(vec![TrigMode { wave, amp: 0.1, phase: -PI / 2.0 }]);
        let data =
            BoundaryConformalData::new(BoundaryGeometry::FlatTorus { periods: vec![1.0, 1.0] }, phi, 16).unwrap();
        let e = expansion_coefficients(&data, 3).unwrap();
        let expect = -(0.1f64 * 2.0 * PI).powi(2) / 4.0;
        assert!((e.phi[1][0] - expect).abs() < 1e-12, "{}", e.phi[1][0]);
    }

    #[test]
    fn spectral_matches_jets() {
        let data = torus(3, 7, 32);
        let grid = data.grid().unwrap();
        for (x, l) in data.nodes().iter().zip(&grid).step_by(997) {
            let j = data.local(x).unwrap();
            assert!((&j.dphi - &l.dphi).amax() < 1e-11);
            assert!((&j.ddphi - &l.ddphi).amax() < 1e-10);
            let a = j.d3u.unwrap();
            let b = l.d3u.clone().unwrap();
            let diff = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-6, "{diff}");
        }
    }

    #[test]
    fn kbar_examples() {
        let flat = BoundaryConformalData::new(
            BoundaryGeometry::FlatTorus { periods: vec![1.0, 1.0] },
            ConformalFactor::Constant(1.0),
            8,
        )
        .unwrap();
        assert_eq!(kbar(&flat, 3).unwrap().constant, Some(0));
        let sphere = BoundaryConformalData::new(
            BoundaryGeometry::FlatChart { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] },
            ConformalFactor::Quadric { a: 0.5, b: vec![0.0, 0.0], c: 0.5 },
            8,
        )
        .unwrap();
        assert_eq!(kbar(&sphere, 3).unwrap().constant, Some(1));
        let cusp = BoundaryConformalData::new(
            BoundaryGeometry::FlatChart { lo: vec![0.05, 0.05], hi: vec![0.3, 0.3] },
            ConformalFactor::Neck { i: 16.0, center: vec![0.0, 0.0] },
            6,
        )
        .unwrap();
        assert_eq!(kbar(&cusp, 3).unwrap().constant, Some(-1));
        let k4 = kbar(&torus(3, 3, 8), 4).unwrap();
        assert!(k4.constant.is_none() && k4.obstruction.is_some());
    }

    #[test]
    fn kbar_n4_closed_form() {
        let data = torus(3, 11, 8);
        for l in data.grid().unwrap() {
            assert!((kbar_at(4, 0.0, &l) - kbar_closed_form_n4(0.0, &l)).abs() < 1e-12);
        }
    }
}
