//! Fourier differentiation of samples on a flat torus.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Samples on an m^d grid of the torus Π [0, L_a), last axis fastest.
#[derive(Clone, Debug)]
pub struct TorusSpectrum {
    pub m: usize,
    pub periods: Vec<f64>,
    coeffs: Vec<Complex64>,
}

fn strides(m: usize, d: usize) -> Vec<usize> {
    (0..d).map(|a| m.pow((d - 1 - a) as u32)).collect()
}

fn transform_axes(data: &mut [Complex64], m: usize, d: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    let st = strides(m, d);
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for &s in &st {
        for start in 0..total {
            // visit each line once: the start has coordinate 0 along this axis
            if (start / s) % m != 0 {
                continue;
            }
            for (j, z) in line.iter_mut().enumerate() {
                *z = data[start + j * s];
            }
            fft.process(&mut line);
            for (j, z) in line.iter().enumerate() {
                data[start + j * s] = *z;
            }
        }
    }
}

impl TorusSpectrum {
    pub fn new(values: &[f64], m: usize, periods: &[f64]) -> Self {
        let d = periods.len();
        assert_eq!(values.len(), m.pow(d as u32), "sample count does not match grid");
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform_axes(&mut coeffs, m, d, false);
        TorusSpectrum { m, periods: periods.to_vec(), coeffs }
    }

    /// ∂^α of the sampled function at the grid nodes.
    pub fn derivative(&self, alpha: &[usize]) -> Vec<f64> {
        let d = self.periods.len();
        let m = self.m;
        let st = strides(m, d);
        let mut c = self.coeffs.clone();
        for (idx, z) in c.iter_mut().enumerate() {
            let mut f = Complex64::new(1.0, 0.0);
            for a in 0..d {
                if alpha[a] == 0 {
                    continue;
                }
                let j = (idx / st[a]) % m;
                // Nyquist mode has no odd derivative on a real grid
                if 2 * j == m && alpha[a] % 2 == 1 {
                    f = Complex64::new(0.0, 0.0);
                    break;
                }
                let kappa = if 2 * j <= m { j as f64 } else { j as f64 - m as f64 };
                let w = Complex64::new(0.0, 2.0 * PI * kappa / self.periods[a]);
                f *= w.powu(alpha[a] as u32);
            }
            *z *= f;
        }
        transform_axes(&mut c, m, d, true);
        let norm = 1.0 / c.len() as f64;
        c.iter().map(|z| z.re * norm).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_derivatives_exact() {
        let m = 16;
        let (lx, ly) = (1.0, 2.0);
        let mut v = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let (x, y) = (lx * i as f64 / m as f64, ly * j as f64 / m as f64);
                v.push((2.0 * PI * x).sin() * (2.0 * PI * 3.0 * y / ly).cos());
            }
        }
        let s = TorusSpectrum::new(&v, m, &[lx, ly]);
        let dxy = s.derivative(&[1, 1]);
        for i in 0..m {
            for j in 0..m {
                let (x, y) = (lx * i as f64 / m as f64, ly * j as f64 / m as f64);
                let exact = -(2.0 * PI) * (6.0 * PI / ly) * (2.0 * PI * x).cos() * (6.0 * PI * y / ly).sin();
                assert!((dxy[i * m + j] - exact).abs() < 1e-11);
            }
        }
    }
}
