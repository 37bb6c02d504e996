//! Overset grid on the unit square torus: a periodic Cartesian patch with
//! the puncture discs cut out, plus one log-radial annulus per puncture.

use crate::error::{AlhError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Flat unit-square torus with N discs of radius 1/i removed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PuncturedTorusDomain {
    pub punctures: Vec<[f64; 2]>,
    pub i: f64,
}

/// Minimum-image displacement on the unit torus.
pub fn torus_delta(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let w = |d: f64| d - d.round();
    [w(a[0] - b[0]), w(a[1] - b[1])]
}

impl PuncturedTorusDomain {
    pub fn new(punctures: Vec<[f64; 2]>, i: f64) -> Result<Self> {
        if punctures.is_empty() {
            return Err(AlhError::Parameter("at least one puncture is required".into()));
        }
        if !(i > 2.0) || !i.is_finite() {
            return Err(AlhError::Parameter(format!("neck parameter i = {i} must exceed 2")));
        }
        let punctures: Vec<[f64; 2]> = punctures.iter().map(|p| [p[0].rem_euclid(1.0), p[1].rem_euclid(1.0)]).collect();
        let d = Self { punctures, i };
        if d.d_min() <= 2.0 / i {
            return Err(AlhError::Domain(format!("discs of radius 1/i = {} overlap", 1.0 / i)));
        }
        Ok(d)
    }

    /// N punctures spread along the diagonal-free default layout.
    pub fn standard(n: usize, i: f64) -> Result<Self> {
        let p = match n {
            1 => vec![[0.0, 0.0]],
            2 => vec![[0.0, 0.0], [0.5, 0.5]],
            3 => vec![[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]],
            4 => vec![[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]],
            _ => return Err(AlhError::Feature(format!("no default layout for {n} punctures"))),
        };
        Self::new(p, i)
    }

    /// Shortest distance between distinct punctures, including lattice images.
    pub fn d_min(&self) -> f64 {
        let mut d = 1.0f64;
        for (a, p) in self.punctures.iter().enumerate() {
            for q in &self.punctures[a + 1..] {
                let e = torus_delta(*p, *q);
                d = d.min(e[0].hypot(e[1]));
            }
        }
        d
    }

    pub fn log_i(&self) -> f64 {
        self.i.ln()
    }

    /// Nearest puncture index, displacement and distance.
    pub fn nearest(&self, x: [f64; 2]) -> (usize, [f64; 2], f64) {
        let mut best = (0, [0.0; 2], f64::INFINITY);
        for (k, p) in self.punctures.iter().enumerate() {
            let d = torus_delta(x, *p);
            let r = d[0].hypot(d[1]);
            if r < best.2 {
                best = (k, d, r);
            }
        }
        best
    }
}

/// How the disc boundaries are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    /// ∂_ρ ω = -2i on every circle ρ = 1/i.
    Neumann,
    /// Two copies of the torus joined through every neck.
    Doubled,
}

/// Resolution and layout of a [`CompositeGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Cartesian nodes per side, also the angular node count of the annuli.
    pub n: usize,
    /// Radial intervals of each annulus (default max(n/2, n L ρ̂_out / 4)).
    pub n_r: Option<usize>,
    pub coupling: Coupling,
}

impl GridSpec {
    pub fn new(n: usize) -> Self {
        Self { n, n_r: None, coupling: Coupling::Neumann }
    }

    pub fn doubled(n: usize) -> Self {
        Self { n, n_r: None, coupling: Coupling::Doubled }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Active,
    Fringe,
    Hole,
}

/// Interpolated value Σ w_k U[idx_k] + shift.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub idx: Vec<usize>,
    pub w: Vec<f64>,
    pub shift: f64,
}

impl Stencil {
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.idx.iter().zip(&self.w).map(|(&k, w)| w * u[k]).sum::<f64>() + self.shift
    }
}

/// Radial index range [a_min, n_r]; rows ±n_r are fringe rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub puncture: usize,
    pub copy_plus: usize,
    pub copy_minus: Option<usize>,
    pub a_min: i64,
    pub offset: usize,
}

#[derive(Clone, Debug)]
pub struct CompositeGrid {
    pub domain: PuncturedTorusDomain,
    pub spec: GridSpec,
    pub n: usize,
    pub h: f64,
    pub copies: usize,
    /// L = log i.
    pub log_i: f64,
    pub rho_out: f64,
    pub rho_c: f64,
    pub rhohat_out: f64,
    pub n_r: usize,
    pub n_phi: usize,
    pub d_rhohat: f64,
    pub d_phi: f64,
    pub kinds: Vec<NodeKind>,
    /// Unknown index per (copy, node), usize::MAX on holes.
    pub cart_index: Vec<usize>,
    pub annuli: Vec<Annulus>,
    /// (row, stencil) for every fringe unknown.
    pub fringe: Vec<(usize, Stencil)>,
    pub unknowns: usize,
}

/// Cubic Lagrange weights on nodes -1, 0, 1, 2 at offset t.
pub fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

impl CompositeGrid {
    pub fn new(domain: &PuncturedTorusDomain, spec: GridSpec) -> Result<Self> {
        let n = spec.n;
        if n < 16 || n % 2 != 0 {
            return Err(AlhError::Parameter(format!("grid size {n} must be even and at least 16")));
        }
        let h = 1.0 / n as f64;
        let log_i = domain.log_i();
        let rho_out = 0.4 * domain.d_min();
        let rho_c = 0.55 * rho_out;
        if 1.0 / domain.i >= 0.8 * rho_c {
            return Err(AlhError::Domain(format!("disc radius 1/i = {} too large for the overlap layout", 1.0 / domain.i)));
        }
        if (rho_out - rho_c) < 3.0 * h * std::f64::consts::SQRT_2 + 2.0 * h {
            return Err(AlhError::Parameter(format!("grid size {n} too coarse: patches overlap by fewer than 3 cells")));
        }
        let rhohat_out = 1.0 + rho_out.ln() / log_i;
        // Radial spacing in ρ is ρ L Δρ̂; keep it near h at the overlap.
        let n_r = spec.n_r.unwrap_or_else(|| (n / 2).max((0.25 * n as f64 * log_i * rhohat_out).ceil() as usize));
        let n_phi = n;
        let d_rhohat = rhohat_out / n_r as f64;
        let d_phi = 2.0 * PI / n_phi as f64;
        let copies = match spec.coupling {
            Coupling::Neumann => 1,
            Coupling::Doubled => 2,
        };

        let mut kinds = vec![NodeKind::Hole; n * n];
        for l in 0..n {
            for j in 0..n {
                let (_, _, r) = domain.nearest([j as f64 * h, l as f64 * h]);
                if r >= rho_c {
                    kinds[l * n + j] = NodeKind::Active;
                }
            }
        }
        let snapshot = kinds.clone();
        for l in 0..n {
            for j in 0..n {
                if snapshot[l * n + j] != NodeKind::Hole {
                    continue;
                }
                let nb = [((j + 1) % n, l), ((j + n - 1) % n, l), (j, (l + 1) % n), (j, (l + n - 1) % n)];
                if nb.iter().any(|&(a, b)| snapshot[b * n + a] == NodeKind::Active) {
                    kinds[l * n + j] = NodeKind::Fringe;
                }
            }
        }

        let mut cart_index = vec![usize::MAX; copies * n * n];
        let mut next = 0;
        for c in 0..copies {
            for (k, kind) in kinds.iter().enumerate() {
                if *kind != NodeKind::Hole {
                    cart_index[c * n * n + k] = next;
                    next += 1;
                }
            }
        }
        let mut annuli = Vec::new();
        for p in 0..domain.punctures.len() {
            let (copy_minus, a_min) = match spec.coupling {
                Coupling::Neumann => (None, 0i64),
                Coupling::Doubled => (Some(1), -(n_r as i64)),
            };
            let rows = (n_r as i64 - a_min + 1) as usize;
            annuli.push(Annulus { puncture: p, copy_plus: 0, copy_minus, a_min, offset: next });
            next += rows * n_phi;
        }

        let mut g = Self {
            domain: domain.clone(),
            spec,
            n,
            h,
            copies,
            log_i,
            rho_out,
            rho_c,
            rhohat_out,
            n_r,
            n_phi,
            d_rhohat,
            d_phi,
            kinds,
            cart_index,
            annuli,
            fringe: Vec::new(),
            unknowns: next,
        };
        g.build_fringe()?;
        Ok(g)
    }

    /// Unknown index of annulus node (a, b); b is taken modulo n_phi.
    pub fn ann_index(&self, an: &Annulus, a: i64, b: i64) -> usize {
        let bb = b.rem_euclid(self.n_phi as i64) as usize;
        an.offset + (a - an.a_min) as usize * self.n_phi + bb
    }

    pub fn cart_node(&self, copy: usize, j: usize, l: usize) -> usize {
        self.cart_index[copy * self.n * self.n + l * self.n + j]
    }

    /// Physical radius of annulus row a.
    pub fn rho_of_row(&self, a: i64) -> f64 {
        ((a.abs() as f64 * self.d_rhohat - 1.0) * self.log_i).exp()
    }

    pub fn rhohat_of(&self, rho: f64) -> f64 {
        rho.ln() / self.log_i + 1.0
    }

    /// Which side of the annulus a copy lives on (+1 or -1).
    fn side(&self, an: &Annulus, copy: usize) -> f64 {
        if copy == an.copy_plus {
            1.0
        } else {
            -1.0
        }
    }

    /// Interpolation from annulus rows at signed ρ̂ and angle φ.
    pub fn annulus_stencil(&self, an: &Annulus, signed_rhohat: f64, phi: f64) -> Result<(Vec<usize>, Vec<f64>)> {
        let s = signed_rhohat / self.d_rhohat;
        let a0 = s.floor() as i64;
        let wr = cubic_weights(s - a0 as f64);
        let sp = phi.rem_euclid(2.0 * PI) / self.d_phi;
        let b0 = sp.floor() as i64;
        let wp = cubic_weights(sp - b0 as f64);
        let (lo, hi) = (an.a_min, self.n_r as i64);
        let mut idx = Vec::with_capacity(16);
        let mut w = Vec::with_capacity(16);
        for (ka, wa) in wr.iter().enumerate() {
            let mut a = a0 - 1 + ka as i64;
            if lo == 0 && a < 0 {
                a = -a;
            }
            let ok = if lo == 0 { a < hi } else { a > lo && a < hi };
            if !ok {
                return Err(AlhError::Parameter("annulus interpolation stencil leaves the active rows".into()));
            }
            for (kb, wb) in wp.iter().enumerate() {
                idx.push(self.ann_index(an, a, b0 - 1 + kb as i64));
                w.push(wa * wb);
            }
        }
        Ok((idx, w))
    }

    /// Bicubic interpolation from the Cartesian patch of one copy; every
    /// donor must be an active node when `strict`.
    pub fn cartesian_stencil(&self, copy: usize, x: [f64; 2], strict: bool) -> Result<(Vec<usize>, Vec<f64>)> {
        let n = self.n as i64;
        let sx = x[0].rem_euclid(1.0) / self.h;
        let sy = x[1].rem_euclid(1.0) / self.h;
        let (j0, l0) = (sx.floor() as i64, sy.floor() as i64);
        let wx = cubic_weights(sx - j0 as f64);
        let wy = cubic_weights(sy - l0 as f64);
        let mut idx = Vec::with_capacity(16);
        let mut w = Vec::with_capacity(16);
        for (kl, wl) in wy.iter().enumerate() {
            let l = (l0 - 1 + kl as i64).rem_euclid(n) as usize;
            for (kj, wj) in wx.iter().enumerate() {
                let j = (j0 - 1 + kj as i64).rem_euclid(n) as usize;
                let kind = self.kinds[l * self.n + j];
                if kind == NodeKind::Hole || (strict && kind != NodeKind::Active) {
                    return Err(AlhError::Parameter("Cartesian interpolation stencil touches the excised region".into()));
                }
                idx.push(self.cart_node(copy, j, l));
                w.push(wl * wj);
            }
        }
        Ok((idx, w))
    }

    fn build_fringe(&mut self) -> Result<()> {
        let n = self.n;
        let mut fringe = Vec::new();
        for c in 0..self.copies {
            for l in 0..n {
                for j in 0..n {
                    if self.kinds[l * n + j] != NodeKind::Fringe {
                        continue;
                    }
                    let x = [j as f64 * self.h, l as f64 * self.h];
                    let (p, d, rho) = self.domain.nearest(x);
                    let an = &self.annuli[p];
                    let side = self.side(an, c);
                    let (idx, w) = self.annulus_stencil(an, side * self.rhohat_of(rho), d[1].atan2(d[0]))?;
                    fringe.push((self.cart_node(c, j, l), Stencil { idx, w, shift: -2.0 * rho.ln() }));
                }
            }
        }
        for an in &self.annuli {
            let p = self.domain.punctures[an.puncture];
            let sides: Vec<(i64, usize)> = match an.copy_minus {
                None => vec![(self.n_r as i64, an.copy_plus)],
                Some(m) => vec![(self.n_r as i64, an.copy_plus), (-(self.n_r as i64), m)],
            };
            for (a, copy) in sides {
                for b in 0..self.n_phi {
                    let phi = b as f64 * self.d_phi;
                    let x = [p[0] + self.rho_out * phi.cos(), p[1] + self.rho_out * phi.sin()];
                    let (idx, w) = self.cartesian_stencil(copy, x, true)?;
                    fringe.push((self.ann_index(an, a, b as i64), Stencil { idx, w, shift: 2.0 * self.rho_out.ln() }));
                }
            }
        }
        self.fringe = fringe;
        Ok(())
    }

    /// Cartesian node positions, for diagnostics and output.
    pub fn node_xy(&self, j: usize, l: usize) -> [f64; 2] {
        [j as f64 * self.h, l as f64 * self.h]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_unity() {
        for t in [0.0, 0.25, 0.7] {
            let w = cubic_weights(t);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        let d = PuncturedTorusDomain::standard(1, 16.0).unwrap();
        let g = CompositeGrid::new(&d, GridSpec::new(64)).unwrap();
        for (_, s) in &g.fringe {
            assert!((s.w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
        assert!(PuncturedTorusDomain::new(vec![[0.0, 0.0], [0.01, 0.0]], 16.0).is_err());
    }
}
