//! Boundary manifolds (N^{n-1}, h_k) given by explicit diagonal charts.

use crate::error::{AlhError, Result};
use crate::jet::Scalar;
use crate::quad::{gauss_legendre_on, integrate};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Constant-curvature boundary metric in a diagonal chart.
///
/// The hyperbolic case is a geodesic ball of the given area in polar
/// coordinates dθ² + sinh²θ dΩ². Integrals over it are exact stand-ins for a
/// compact quotient only when the integrand is constant along the boundary,
/// which is the case for all the static families handled here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    FlatTorus { periods: Vec<f64> },
    RoundSphere { dim: usize },
    HyperbolicBall { dim: usize, area: f64 },
}

/// A quadrature node with its coordinate weight (for the measure dy, not
/// the Riemannian one).
#[derive(Clone, Debug, PartialEq)]
pub struct QuadNode {
    pub y: Vec<f64>,
    pub w: f64,
}

fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf((d as f64 + 1.0) / 2.0) / gamma((d as f64 + 1.0) / 2.0)
}

impl Boundary {
    pub fn flat_torus(periods: Vec<f64>) -> Self {
        Boundary::FlatTorus { periods }
    }

    pub fn dim(&self) -> usize {
        match self {
            Boundary::FlatTorus { periods } => periods.len(),
            Boundary::RoundSphere { dim } | Boundary::HyperbolicBall { dim, .. } => *dim,
        }
    }

    /// Sign of the sectional curvature.
    pub fn k(&self) -> i32 {
        match self {
            Boundary::FlatTorus { .. } => 0,
            Boundary::RoundSphere { dim } => (*dim > 1) as i32,
            Boundary::HyperbolicBall { dim, .. } => -((*dim > 1) as i32),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Boundary::FlatTorus { periods } => periods.iter().product(),
            Boundary::RoundSphere { dim } => sphere_area(*dim),
            Boundary::HyperbolicBall { area, .. } => *area,
        }
    }

    /// Diagonal components h_ii(y).
    pub fn diag<T: Scalar>(&self, y: &[T]) -> Vec<T> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d);
        match self {
            Boundary::FlatTorus { .. } => out.resize(d, T::cst(1.0)),
            Boundary::RoundSphere { .. } | Boundary::HyperbolicBall { .. } => {
                let hyp = matches!(self, Boundary::HyperbolicBall { .. });
                let mut s = T::cst(1.0);
                for a in 0..d {
                    out.push(s);
                    let ya = y[a];
                    let w = if a == 0 && hyp { ya.sinh() } else { ya.sin() };
                    s = s * w * w;
                }
            }
        }
        out
    }

    pub fn sqrt_det(&self, y: &[f64]) -> f64 {
        self.diag(y).iter().product::<f64>().sqrt()
    }

    pub fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(AlhError::Dimension { expected: self.dim(), got: y.len() });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(AlhError::Domain("non-finite boundary coordinate".into()));
        }
        Ok(())
    }

    /// Radius of the geodesic ball with the requested area.
    fn hyperbolic_radius(dim: usize, area: f64) -> f64 {
        let omega = sphere_area(dim - 1);
        let vol = |t: f64| omega * integrate(|s| s.sinh().powi(dim as i32 - 1), 0.0, t, 16, 12);
        let (mut a, mut b) = (0.0, 1.0);
        while vol(b) < area {
            b *= 2.0;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if vol(m) < area {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// Tensor-product rule: trapezoid along periodic directions,
    /// Gauss-Legendre along the others. `res` nodes per direction.
    pub fn quadrature(&self, res: usize) -> Vec<QuadNode> {
        let d = self.dim();
        let mut axes: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(d);
        let trap = |len: f64, m: usize| -> (Vec<f64>, Vec<f64>) {
            ((0..m).map(|j| len * j as f64 / m as f64).collect(), vec![len / m as f64; m])
        };
        match self {
            Boundary::FlatTorus { periods } => {
                for p in periods {
                    axes.push(trap(*p, res));
                }
            }
            Boundary::RoundSphere { .. } => {
                for _ in 0..d - 1 {
                    axes.push(gauss_legendre_on(res, 0.0, PI));
                }
                axes.push(trap(2.0 * PI, 2 * res));
            }
            Boundary::HyperbolicBall { area, .. } => {
                if d == 1 {
                    axes.push(trap(*area, res));
                } else {
                    axes.push(gauss_legendre_on(res, 0.0, Self::hyperbolic_radius(d, *area)));
                    for _ in 1..d - 1 {
                        axes.push(gauss_legendre_on(res, 0.0, PI));
                    }
                    axes.push(trap(2.0 * PI, 2 * res));
                }
            }
        }
        let mut nodes = vec![QuadNode { y: vec![], w: 1.0 }];
        for (xs, ws) in &axes {
            let mut next = Vec::with_capacity(nodes.len() * xs.len());
            for nd in &nodes {
                for (x, w) in xs.iter().zip(ws) {
                    let mut y = nd.y.clone();
                    y.push(*x);
                    next.push(QuadNode { y, w: nd.w * w });
                }
            }
            nodes = next;
        }
        nodes
    }

    /// ∫ f dμ_h by [`Boundary::quadrature`].
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, res: usize, f: F) -> f64 {
        let terms: Vec<f64> = self.quadrature(res).iter().map(|q| q.w * self.sqrt_det(&q.y) * f(&q.y)).collect();
        crate::quad::pairwise_sum(&terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn areas_by_quadrature() {
        for b in [
            Boundary::flat_torus(vec![0.5, 2.0]),
            Boundary::RoundSphere { dim: 2 },
            Boundary::RoundSphere { dim: 3 },
            Boundary::HyperbolicBall { dim: 2, area: 4.0 * PI },
            Boundary::HyperbolicBall { dim: 3, area: 10.0 },
        ] {
            let a = b.integrate(16, |_| 1.0);
            assert!((a - b.area()).abs() < 1e-10 * b.area(), "{b:?}: {a}");
        }
    }
}
