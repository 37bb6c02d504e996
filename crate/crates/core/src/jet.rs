//! Second-order forward-mode automatic differentiation.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to up to [`MAXD`] independent variables. Metric components and
//! static potentials are written once, generically over [`Scalar`], and then
//! evaluated either on `f64` or on jets to get exact first and second
//! derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of independent variables tracked by a jet.
pub const MAXD: usize = 6;

/// Arithmetic needed by the generic metric and potential evaluators.
pub trait Scalar:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + Send
    + Sync
{
    fn cst(v: f64) -> Self;
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Value, gradient and Hessian of a scalar quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; MAXD],
    pub h: [[f64; MAXD]; MAXD],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, g: [0.0; MAXD], h: [[0.0; MAXD]; MAXD] }
    }

    /// The independent variable number `idx`, evaluated at `v`.
    pub fn var(v: f64, idx: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[idx] = 1.0;
        j
    }

    /// Seeds a whole point: variable `a` is `x[a]`.
    pub fn point(x: &[f64]) -> Vec<Jet> {
        assert!(x.len() <= MAXD, "jet dimension exceeds MAXD");
        x.iter().enumerate().map(|(a, &v)| Jet::var(v, a)).collect()
    }

    /// Applies a scalar function given f(v), f'(v), f''(v).
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::constant(f0);
        for a in 0..MAXD {
            out.g[a] = f1 * self.g[a];
        }
        for a in 0..MAXD {
            for b in 0..MAXD {
                out.h[a][b] = f1 * self.h[a][b] + f2 * self.g[a] * self.g[b];
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for a in 0..MAXD {
            self.g[a] += o.g[a];
            for b in 0..MAXD {
                self.h[a][b] += o.h[a][b];
            }
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.v = -self.v;
        for a in 0..MAXD {
            self.g[a] = -self.g[a];
            for b in 0..MAXD {
                self.h[a][b] = -self.h[a][b];
            }
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for a in 0..MAXD {
            out.g[a] = self.v * o.g[a] + o.v * self.g[a];
        }
        for a in 0..MAXD {
            for b in 0..MAXD {
                out.h[a][b] = self.v * o.h[a][b]
                    + o.v * self.h[a][b]
                    + self.g[a] * o.g[b]
                    + o.g[a] * self.g[b];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, c: f64) -> Jet {
        self.v *= c;
        for a in 0..MAXD {
            self.g[a] *= c;
            for b in 0..MAXD {
                self.h[a][b] *= c;
            }
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn re(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }
    fn powi(self, k: i32) -> Self {
        let kf = k as f64;
        let p0 = self.v.powi(k);
        let p1 = if k == 0 { 0.0 } else { kf * self.v.powi(k - 1) };
        let p2 = if k == 0 || k == 1 { 0.0 } else { kf * (kf - 1.0) * self.v.powi(k - 2) };
        self.chain(p0, p1, p2)
    }
    fn powf(self, p: f64) -> Self {
        let p0 = self.v.powf(p);
        self.chain(p0, p * self.v.powf(p - 1.0), p * (p - 1.0) * self.v.powf(p - 2.0))
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_hessian() {
        let x = Jet::point(&[2.0, 3.0]);
        let f = x[0] * x[0] * x[1] + x[1].sin();
        assert!((f.v - (12.0 + 3f64.sin())).abs() < 1e-15);
        assert!((f.g[0] - 12.0).abs() < 1e-15);
        assert!((f.g[1] - (4.0 + 3f64.cos())).abs() < 1e-15);
        assert!((f.h[0][0] - 6.0).abs() < 1e-15);
        assert!((f.h[0][1] - 4.0).abs() < 1e-15);
        assert!((f.h[1][1] + 3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn quotient_and_roots() {
        let x = Jet::var(4.0, 0);
        let f = x.sqrt() / (x + 1.0);
        // f = sqrt(x)/(x+1); f' = (1-x)/(2 sqrt(x)(x+1)^2)
        let d = (1.0 - 4.0) / (2.0 * 2.0 * 25.0);
        assert!((f.g[0] - d).abs() < 1e-15);
        let p = x.powf(1.5);
        assert!((p.h[0][0] - 0.75 / 2.0).abs() < 1e-15);
        let q = x.powi(-2);
        assert!((q.h[0][0] - 6.0 / 256.0).abs() < 1e-15);
    }
}
