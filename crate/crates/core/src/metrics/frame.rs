//! Orthonormal frames of diagonal backgrounds and frame deviations e_ij.

use super::{BKParams, ChartMetric};
use crate::error::{AlhError, Result};
use crate::jet::{Jet, Scalar};
use nalgebra::DMatrix;

/// n vector fields in chart components. Tangential fields come first, the
/// radial field f_n last.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub vectors: Vec<Vec<f64>>,
}

impl Frame {
    /// max |b(f_i, f_j) - δ_ij|.
    pub fn orthonormality_residual(&self, b: &DMatrix<f64>) -> f64 {
        let n = self.vectors.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for c in 0..n {
                        s += b[(a, c)] * self.vectors[i][a] * self.vectors[j][c];
                    }
                }
                worst = worst.max((s - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

/// f_i = r⁻¹ ε_i (ε an h_k-orthonormal frame), f_n = √(r²+k) ∂_r, at the
/// point x = (r, y) of the m_c = 0 background.
pub fn on_frame(p: &BKParams, x: &[f64]) -> Result<Frame> {
    let n = p.n;
    if x.len() != n {
        return Err(AlhError::Dimension { expected: n, got: x.len() });
    }
    let r = x[0];
    let w = r * r + p.k as f64;
    if !(r > 0.0) || w <= 0.0 {
        return Err(AlhError::Domain(format!("frame needs r > 0 and r² + k > 0, got r = {r}")));
    }
    let h = p.boundary.diag(&x[1..]);
    let mut vectors = Vec::with_capacity(n);
    for (a, ha) in h.iter().enumerate() {
        let mut v = vec![0.0; n];
        v[a + 1] = 1.0 / (r * ha.sqrt());
        vectors.push(v);
    }
    let mut v = vec![0.0; n];
    v[0] = w.sqrt();
    vectors.push(v);
    Ok(Frame { vectors })
}

/// Order of frame indices: tangential coordinates, then the radial one.
fn frame_order(n: usize, radial: usize) -> Vec<usize> {
    let mut o: Vec<usize> = (0..n).filter(|&a| a != radial).collect();
    o.push(radial);
    o
}

fn check_pair(g: &ChartMetric, b: &ChartMetric, x: &[f64]) -> Result<usize> {
    if g.dim() != b.dim() {
        return Err(AlhError::Dimension { expected: b.dim(), got: g.dim() });
    }
    g.check(x)?;
    b.check(x)?;
    b.radial.ok_or_else(|| AlhError::Feature("background has no radial coordinate".into()))
}

fn deviation<T: Scalar>(gc: &[T], bc: &[T], n: usize, radial: usize) -> Vec<T> {
    let o = frame_order(n, radial);
    let mut e = Vec::with_capacity(n * n);
    for &a in &o {
        for &c in &o {
            let s = (bc[a * n + a] * bc[c * n + c]).sqrt();
            let mut v = gc[a * n + c] / s;
            if a == c {
                v = v - 1.0;
            }
            e.push(v);
        }
    }
    e
}

/// e_ij = g(f_i, f_j) - δ_ij in the orthonormal frame of the diagonal
/// background `b`, tangential indices first and the radial index last.
pub fn frame_deviation(g: &ChartMetric, b: &ChartMetric, x: &[f64]) -> Result<DMatrix<f64>> {
    let radial = check_pair(g, b, x)?;
    let n = g.dim();
    let e = deviation(&g.raw(x), &b.raw(x), n, radial);
    Ok(DMatrix::from_row_slice(n, n, &e))
}

/// Same as [`frame_deviation`] with exact derivatives in every coordinate.
pub fn frame_deviation_jet(g: &ChartMetric, b: &ChartMetric, x: &[f64]) -> Result<Vec<Jet>> {
    let radial = check_pair(g, b, x)?;
    let p = Jet::point(x);
    let (gc, bc) = match (g.raw_jet(&p), b.raw_jet(&p)) {
        (Some(gc), Some(bc)) => (gc, bc),
        _ => return Err(AlhError::Feature("frame derivatives need closed-form metrics".into())),
    };
    Ok(deviation(&gc, &bc, g.dim(), radial))
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn hm_deviation_closed_form() {
        let p = HMParams::new(3, 1.0).unwrap();
        let e = frame_deviation(&hm_spatial(&p), &hm_background(&p), &[10.0, 0.1, 0.2]).unwrap();
        assert!((e[(0, 0)] + 0.002).abs() < 1e-15);
        assert!((e[(2, 2)] - (1.0 / 0.998 - 1.0)).abs() < 1e-15);
        assert!(e[(1, 1)].abs() < 1e-15);
    }

    #[test]
    fn frame_is_orthonormal() {
        let p = BKParams::with_default_boundary(4, -1, 0.0).unwrap();
        let x = [5.0, 0.4, 1.0, 2.0];
        let f = on_frame(&p, &x).unwrap();
        let b = bk_spatial(&p).components(&x).unwrap();
        assert!(f.orthonormality_residual(&b) < 1e-12);
    }
}
