//! Christoffel symbols and curvature, exact (jets) or by finite differences.
//!
//! Convention: R_{ijk}{}^l = ∂_jΓ^l_{ik} − ∂_iΓ^l_{jk} + Γ^m_{ik}Γ^l_{mj} − Γ^m_{jk}Γ^l_{mi},
//! Ricci R_{ik} = R_{ijk}{}^j, so the round sphere has positive Ricci.

use super::ChartMetric;
use crate::error::{AlhError, Result};
use crate::jet::Jet;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Step for first derivatives of the metric.
pub fn fd_step(x: f64) -> f64 {
    (1e-5 * x.abs()).max(1e-5)
}

/// Outer step used when differentiating finite-difference Christoffels a
/// second time; a 1e-5 step there would leave ~1e-6 round-off.
pub fn fd_step_outer(x: f64) -> f64 {
    (1e-3 * x.abs()).max(1e-3)
}

/// Christoffel symbols of the second kind, Γ^c_{ab} stored at `[c][a][b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Christoffel {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.data[(c * self.n + a) * self.n + b]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub n: usize,
    /// R_{ijk}{}^l at `[i][j][k][l]`.
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

impl Curvature {
    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.riemann[((i * n + j) * n + k) * n + l]
    }
    pub fn ricci(&self, i: usize, k: usize) -> f64 {
        self.ricci[i * self.n + k]
    }
    pub fn ricci_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.ricci)
    }
}

/// Metric, inverse, first derivatives, Christoffels and their derivatives
/// at one point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub n: usize,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// ∂_c g_{ab} at `[c][a][b]`.
    pub dg: Vec<f64>,
    pub gamma: Christoffel,
    /// ∂_d Γ^c_{ab} at `[d][c][a][b]`.
    pub dgamma: Vec<f64>,
    pub exact: bool,
}

fn invert(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    let det = g.determinant();
    let scale: f64 = (0..g.nrows()).map(|a| g[(a, a)].abs()).product();
    if !det.is_finite() || det.abs() <= 1e-14 * scale.max(1e-300) {
        return Err(AlhError::Singularity(format!("{x:?}")));
    }
    g.clone().try_inverse().ok_or_else(|| AlhError::Singularity(format!("{x:?}")))
}

fn gamma_from(n: usize, ginv: &DMatrix<f64>, dg: &[f64]) -> Vec<f64> {
    let idx = |c: usize, a: usize, b: usize| (c * n + a) * n + b;
    let mut first = vec![0.0; n * n * n];
    for d in 0..n {
        for a in 0..n {
            for b in 0..n {
                first[idx(d, a, b)] = 0.5 * (dg[idx(a, d, b)] + dg[idx(b, d, a)] - dg[idx(d, a, b)]);
            }
        }
    }
    let mut out = vec![0.0; n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                out[idx(c, a, b)] = (0..n).map(|d| ginv[(c, d)] * first[idx(d, a, b)]).sum();
            }
        }
    }
    out
}

fn metric_fd_derivs(g: &ChartMetric, x: &[f64]) -> Vec<f64> {
    let n = g.dim();
    let mut dg = vec![0.0; n * n * n];
    let mut y = x.to_vec();
    for c in 0..n {
        let h = fd_step(x[c]);
        let mut eval = |s: f64| {
            y[c] = x[c] + s * h;
            let v = g.raw(&y);
            y[c] = x[c];
            v
        };
        let (p2, p1, m1, m2) = (eval(2.0), eval(1.0), eval(-1.0), eval(-2.0));
        for ab in 0..n * n {
            dg[c * n * n + ab] = (-p2[ab] + 8.0 * p1[ab] - 8.0 * m1[ab] + m2[ab]) / (12.0 * h);
        }
    }
    dg
}

fn gamma_numeric_at(g: &ChartMetric, x: &[f64]) -> Result<Vec<f64>> {
    let n = g.dim();
    let gm = DMatrix::from_row_slice(n, n, &g.raw(x));
    let ginv = invert(&gm, x)?;
    Ok(gamma_from(n, &ginv, &metric_fd_derivs(g, x)))
}

impl PointGeometry {
    /// Exact when the metric supports jets, finite differences otherwise.
    pub fn at(g: &ChartMetric, x: &[f64]) -> Result<Self> {
        g.check(x)?;
        if let Some(comps) = g.raw_jet(&Jet::point(x)) {
            Self::from_jets(g.dim(), x, &comps)
        } else {
            Self::numeric(g, x)
        }
    }

    fn from_jets(n: usize, x: &[f64], comps: &[Jet]) -> Result<Self> {
        let idx = |c: usize, a: usize, b: usize| (c * n + a) * n + b;
        let gm = DMatrix::from_fn(n, n, |a, b| comps[a * n + b].v);
        let ginv = invert(&gm, x)?;
        let mut dg = vec![0.0; n * n * n];
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    dg[idx(c, a, b)] = comps[a * n + b].g[c];
                }
            }
        }
        let gamma = gamma_from(n, &ginv, &dg);
        // ∂_e Γ_{d,ab} (first kind)
        let ddg = |e: usize, c: usize, a: usize, b: usize| comps[a * n + b].h[e][c];
        let mut dgamma = vec![0.0; n * n * n * n];
        for e in 0..n {
            let mut dfirst = vec![0.0; n * n * n];
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        dfirst[idx(d, a, b)] = 0.5 * (ddg(e, a, d, b) + ddg(e, b, d, a) - ddg(e, d, a, b));
                    }
                }
            }
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut s = 0.0;
                        for d in 0..n {
                            s += ginv[(c, d)] * dfirst[idx(d, a, b)];
                            // -g^{cp} ∂_e g_{pq} Γ^q_{ab}
                            let mut t = 0.0;
                            for q in 0..n {
                                t += dg[idx(e, d, q)] * gamma[idx(q, a, b)];
                            }
                            s -= ginv[(c, d)] * t;
                        }
                        dgamma[e * n * n * n + idx(c, a, b)] = s;
                    }
                }
            }
        }
        Ok(PointGeometry { n, g: gm, ginv, dg, gamma: Christoffel { n, data: gamma }, dgamma, exact: true })
    }

    /// Finite-difference path.
    pub fn numeric(g: &ChartMetric, x: &[f64]) -> Result<Self> {
        g.check(x)?;
        let n = g.dim();
        let gm = DMatrix::from_row_slice(n, n, &g.raw(x));
        let ginv = invert(&gm, x)?;
        let dg = metric_fd_derivs(g, x);
        let gamma = gamma_from(n, &ginv, &dg);
        let n3 = n * n * n;
        let mut dgamma = vec![0.0; n * n3];
        let mut y = x.to_vec();
        for e in 0..n {
            let h = fd_step_outer(x[e]);
            let mut at = |s: f64| -> Result<Vec<f64>> {
                y[e] = x[e] + s * h;
                let v = gamma_numeric_at(g, &y);
                y[e] = x[e];
                v
            };
            let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
            for q in 0..n3 {
                dgamma[e * n3 + q] = (-p2[q] + 8.0 * p1[q] - 8.0 * m1[q] + m2[q]) / (12.0 * h);
            }
        }
        Ok(PointGeometry { n, g: gm, ginv, dg, gamma: Christoffel { n, data: gamma }, dgamma, exact: false })
    }

    pub fn dgamma(&self, d: usize, c: usize, a: usize, b: usize) -> f64 {
        let n = self.n;
        self.dgamma[((d * n + c) * n + a) * n + b]
    }

    pub fn curvature(&self) -> Curvature {
        let n = self.n;
        let gm = |c, a, b| self.gamma.get(c, a, b);
        let mut riem = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = self.dgamma(j, l, i, k) - self.dgamma(i, l, j, k);
                        for m in 0..n {
                            v += gm(m, i, k) * gm(l, m, j) - gm(m, j, k) * gm(l, m, i);
                        }
                        riem[((i * n + j) * n + k) * n + l] = v;
                    }
                }
            }
        }
        let mut ricci = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                ricci[i * n + k] = (0..n).map(|j| riem[((i * n + j) * n + k) * n + j]).sum();
            }
        }
        let mut scalar = 0.0;
        for i in 0..n {
            for k in 0..n {
                scalar += self.ginv[(i, k)] * ricci[i * n + k];
            }
        }
        Curvature { n, riemann: riem, ricci, scalar }
    }
}

/// Christoffel symbols: exact for jet-capable families, finite differences
/// otherwise.
pub fn christoffel(g: &ChartMetric, x: &[f64]) -> Result<Christoffel> {
    g.check(x)?;
    if let Some(comps) = g.raw_jet(&Jet::point(x)) {
        let n = g.dim();
        let gm = DMatrix::from_fn(n, n, |a, b| comps[a * n + b].v);
        let ginv = invert(&gm, x)?;
        let mut dg = vec![0.0; n * n * n];
        for c in 0..n {
            for ab in 0..n * n {
                dg[c * n * n + ab] = comps[ab].g[c];
            }
        }
        Ok(Christoffel { n, data: gamma_from(n, &ginv, &dg) })
    } else {
        christoffel_numeric(g, x)
    }
}

/// Christoffel symbols from fourth-order central differences of g.
pub fn christoffel_numeric(g: &ChartMetric, x: &[f64]) -> Result<Christoffel> {
    g.check(x)?;
    Ok(Christoffel { n: g.dim(), data: gamma_numeric_at(g, x)? })
}

pub fn curvature(g: &ChartMetric, x: &[f64]) -> Result<Curvature> {
    Ok(PointGeometry::at(g, x)?.curvature())
}

pub fn curvature_numeric(g: &ChartMetric, x: &[f64]) -> Result<Curvature> {
    Ok(PointGeometry::numeric(g, x)?.curvature())
}

/// Deviation from the vacuum Einstein equations with Λ < 0 normalised so
/// that R_ab = -n g_ab (n = spatial dimension).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EinsteinResidual {
    /// max |R_ab + n g_ab| / sqrt|g_aa g_bb|.
    pub ricci: f64,
    /// |R + n(n+1)|.
    pub scalar: f64,
}

impl EinsteinResidual {
    pub fn max(&self) -> f64 {
        self.ricci.max(self.scalar)
    }
}

pub fn einstein_residual(g: &ChartMetric, x: &[f64]) -> Result<EinsteinResidual> {
    if !g.family.is_lorentzian() {
        return Err(AlhError::Feature("einstein_residual needs a spacetime family".into()));
    }
    let geo = PointGeometry::at(g, x)?;
    let c = geo.curvature();
    let dim = g.dim();
    let n = (dim - 1) as f64;
    let mut worst: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let scale = (geo.g[(a, a)] * geo.g[(b, b)]).abs().sqrt();
            worst = worst.max((c.ricci(a, b) + n * geo.g[(a, b)]).abs() / scale);
        }
    }
    Ok(EinsteinResidual { ricci: worst, scalar: (c.scalar + n * (n + 1.0)).abs() })
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn round_sphere_positive() {
        // unit 2-sphere: Ricci = g, scalar 2
        let s = ChartMetric::from_fn(2, |x| vec![1.0, 0.0, 0.0, x[0].sin().powi(2)]);
        let c = curvature(&s, &[1.0, 0.3]).unwrap();
        assert!((c.scalar - 2.0).abs() < 1e-6, "{}", c.scalar);
    }

    #[test]
    fn bk_christoffel_example() {
        let p = BKParams::with_default_boundary(3, 0, 1.0).unwrap();
        let g = bk_spacetime(&p);
        let gam = christoffel(&g, &[0.0, 2.0, 0.1, 0.2]).unwrap();
        // f = 3, f' = 2r + 2m/r² = 4.5
        assert!((gam.get(0, 0, 1) - 0.75).abs() < 1e-14);
    }
}
