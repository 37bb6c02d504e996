use super::grid::{Annulus, CompositeGrid, Coupling, GridSpec, NodeKind, PuncturedTorusDomain};
use super::neck_omega;
use crate::error::{AlhError, Result};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Starting point of the Newton iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialGuess {
    Zero,
    /// ω_{*,i} near each neck, blended to 0 away from it.
    NeckBlend,
}

#[derive(Clone, Debug)]
pub struct ConformalSolution {
    pub grid: Arc<CompositeGrid>,
    /// Unknown vector: ω on Cartesian nodes, u = ω + 2 log ρ on annuli.
    pub values: Vec<f64>,
    /// Max |Δω - 2e^ω| over active nodes.
    pub residual: f64,
    /// One-sided estimate of max |∂_ρ ω + 2i| / i on the circles ρ = 1/i.
    pub neumann_residual: f64,
    pub update_norm: f64,
    pub iterations: usize,
    pub damping: Vec<f64>,
}

/// One equation row per unknown.
#[derive(Clone, Copy, Debug)]
enum Row {
    Cart { copy: usize, j: usize, l: usize },
    Ann { ann: usize, a: i64, b: i64 },
    Fringe(usize),
}

fn rows(g: &CompositeGrid) -> Vec<Row> {
    let mut out = vec![Row::Fringe(usize::MAX); g.unknowns];
    let n = g.n;
    for c in 0..g.copies {
        for l in 0..n {
            for j in 0..n {
                if g.kinds[l * n + j] == NodeKind::Active {
                    out[g.cart_node(c, j, l)] = Row::Cart { copy: c, j, l };
                }
            }
        }
    }
    for (k, an) in g.annuli.iter().enumerate() {
        for a in an.a_min..=g.n_r as i64 {
            let fringe_row = a == g.n_r as i64 || (an.a_min != 0 && a == an.a_min);
            if fringe_row {
                continue;
            }
            for b in 0..g.n_phi as i64 {
                out[g.ann_index(an, a, b)] = Row::Ann { ann: k, a, b };
            }
        }
    }
    for (f, (row, _)) in g.fringe.iter().enumerate() {
        out[*row] = Row::Fringe(f);
    }
    out
}

struct System {
    g: Arc<CompositeGrid>,
    rows: Vec<Row>,
    cx: f64,
    ar: f64,
    ap: f64,
}

impl System {
    fn new(g: Arc<CompositeGrid>) -> Self {
        let rows = rows(&g);
        debug_assert!(rows.iter().all(|r| !matches!(r, Row::Fringe(usize::MAX))));
        let cx = 1.0 / (g.h * g.h);
        let ar = 1.0 / (g.log_i * g.log_i * g.d_rhohat * g.d_rhohat);
        let ap = 1.0 / (g.d_phi * g.d_phi);
        Self { g, rows, cx, ar, ap }
    }

    fn cart_nb(&self, copy: usize, j: usize, l: usize) -> [usize; 4] {
        let n = self.g.n;
        [
            self.g.cart_node(copy, (j + 1) % n, l),
            self.g.cart_node(copy, (j + n - 1) % n, l),
            self.g.cart_node(copy, j, (l + 1) % n),
            self.g.cart_node(copy, j, (l + n - 1) % n),
        ]
    }

    fn ann_nb(&self, an: &Annulus, a: i64, b: i64) -> [usize; 4] {
        let below = if an.a_min == 0 && a == 0 { 1 } else { a - 1 };
        [
            self.g.ann_index(an, a + 1, b),
            self.g.ann_index(an, below, b),
            self.g.ann_index(an, a, b + 1),
            self.g.ann_index(an, a, b - 1),
        ]
    }

    /// Residual and the weight that brings each row to unit diagonal scale.
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len())
            .into_par_iter()
            .map(|r| match self.rows[r] {
                Row::Cart { copy, j, l } => {
                    let nb = self.cart_nb(copy, j, l);
                    self.cx * (nb.iter().map(|&k| u[k]).sum::<f64>() - 4.0 * u[r]) - 2.0 * u[r].exp()
                }
                Row::Ann { ann, a, b } => {
                    let nb = self.ann_nb(&self.g.annuli[ann], a, b);
                    self.ar * (u[nb[0]] + u[nb[1]] - 2.0 * u[r]) + self.ap * (u[nb[2]] + u[nb[3]] - 2.0 * u[r])
                        - 2.0 * u[r].exp()
                }
                Row::Fringe(f) => u[r] - self.g.fringe[f].1.eval(u),
            })
            .collect()
    }

    fn row_scale(&self, r: usize) -> f64 {
        match self.rows[r] {
            Row::Cart { .. } => 1.0 / (4.0 * self.cx),
            Row::Ann { .. } => 1.0 / (2.0 * (self.ar + self.ap)),
            Row::Fringe(_) => 1.0,
        }
    }

    fn merit(&self, f: &[f64]) -> f64 {
        f.par_iter().enumerate().map(|(r, v)| (v * self.row_scale(r)).powi(2)).sum::<f64>().sqrt()
    }

    fn pde_max(&self, f: &[f64]) -> f64 {
        f.par_iter()
            .enumerate()
            .filter(|(r, _)| !matches!(self.rows[*r], Row::Fringe(_)))
            .map(|(_, v)| v.abs())
            .reduce(|| 0.0, f64::max)
    }

    fn jacobian(&self, u: &[f64]) -> Result<SparseColMat<usize, f64>> {
        let mut t = Vec::with_capacity(u.len() * 6);
        for r in 0..u.len() {
            match self.rows[r] {
                Row::Cart { copy, j, l } => {
                    for k in self.cart_nb(copy, j, l) {
                        t.push(Triplet::new(r, k, self.cx));
                    }
                    t.push(Triplet::new(r, r, -4.0 * self.cx - 2.0 * u[r].exp()));
                }
                Row::Ann { ann, a, b } => {
                    let nb = self.ann_nb(&self.g.annuli[ann], a, b);
                    t.push(Triplet::new(r, nb[0], self.ar));
                    t.push(Triplet::new(r, nb[1], self.ar));
                    t.push(Triplet::new(r, nb[2], self.ap));
                    t.push(Triplet::new(r, nb[3], self.ap));
                    t.push(Triplet::new(r, r, -2.0 * (self.ar + self.ap) - 2.0 * u[r].exp()));
                }
                Row::Fringe(f) => {
                    t.push(Triplet::new(r, r, 1.0));
                    let s = &self.g.fringe[f].1;
                    for (&k, &w) in s.idx.iter().zip(&s.w) {
                        t.push(Triplet::new(r, k, -w));
                    }
                }
            }
        }
        SparseColMat::try_new_from_triplets(u.len(), u.len(), &t)
            .map_err(|e| AlhError::Solver { reason: format!("Jacobian assembly failed: {e:?}"), trace: vec![] })
    }
}

/// Smooth step: 1 for t ≤ 0, 0 for t ≥ 1.
pub(crate) fn smooth_cutoff(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    b / (a + b)
}

fn initial_values(g: &CompositeGrid, guess: InitialGuess) -> Vec<f64> {
    let mut u = vec![0.0; g.unknowns];
    let i = g.domain.i;
    // ω_* dominates the solution; it is blended out between ρ_out and d_min/2.
    let (r1, r2) = (g.rho_out, 0.5 * g.domain.d_min());
    let omega0 = |rho: f64| match guess {
        InitialGuess::Zero => 0.0,
        InitialGuess::NeckBlend => {
            let chi = smooth_cutoff((rho - r1) / (r2 - r1));
            if chi > 0.0 && rho < 1.0 {
                chi * neck_omega(i, rho).unwrap_or(0.0)
            } else {
                0.0
            }
        }
    };
    let n = g.n;
    for c in 0..g.copies {
        for l in 0..n {
            for j in 0..n {
                let k = g.cart_node(c, j, l);
                if k != usize::MAX {
                    let (_, _, rho) = g.domain.nearest(g.node_xy(j, l));
                    u[k] = omega0(rho);
                }
            }
        }
    }
    for an in &g.annuli {
        for a in an.a_min..=g.n_r as i64 {
            let rho = g.rho_of_row(a);
            for b in 0..g.n_phi as i64 {
                u[g.ann_index(an, a, b)] = omega0(rho) + 2.0 * rho.ln();
            }
        }
    }
    u
}

const MAX_ITER: usize = 60;

/// Damped Newton for Δω = 2e^ω on the composite grid.
pub fn solve_with(domain: &PuncturedTorusDomain, spec: GridSpec, guess: InitialGuess) -> Result<ConformalSolution> {
    let g = Arc::new(CompositeGrid::new(domain, spec)?);
    let sys = System::new(g.clone());
    let mut u = initial_values(&g, guess);
    let mut f = sys.residual(&u);
    let mut merit = sys.merit(&f);
    let mut damping = Vec::new();
    let mut update = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let jac = sys.jacobian(&u)?;
        let lu = jac
            .sp_lu()
            .map_err(|e| AlhError::Solver { reason: format!("sparse LU failed: {e:?}"), trace: damping.clone() })?;
        let mut rhs = Mat::<f64>::from_fn(u.len(), 1, |r, _| -f[r]);
        lu.solve_in_place(rhs.as_mut());
        let delta: Vec<f64> = (0..u.len()).map(|r| rhs[(r, 0)]).collect();
        let dmax = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if !dmax.is_finite() {
            return Err(AlhError::Solver { reason: "non-finite Newton update".into(), trace: damping });
        }
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let ft = sys.residual(&trial);
            let mt = sys.merit(&ft);
            if mt.is_finite() && (mt <= (1.0 - 1e-4 * alpha) * merit || alpha * dmax < 1e-9) {
                u = trial;
                f = ft;
                merit = mt;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-6 {
                damping.push(alpha);
                return Err(AlhError::Solver { reason: "line search stalled".into(), trace: damping });
            }
        }
        damping.push(alpha);
        update = alpha * dmax;
        if update < 1e-10 {
            break;
        }
    }
    let residual = sys.pde_max(&f);
    if update >= 1e-10 {
        return Err(AlhError::Solver {
            reason: format!("Newton did not converge in {MAX_ITER} iterations (update {update:e})"),
            trace: damping,
        });
    }
    let neumann_residual = neumann_estimate(&g, &u);
    Ok(ConformalSolution { grid: g, values: u, residual, neumann_residual, update_norm: update, iterations, damping })
}

/// Solves the Neumann problem from the zero initial guess.
pub fn solve(domain: &PuncturedTorusDomain, n: usize) -> Result<ConformalSolution> {
    solve_with(domain, GridSpec::new(n), InitialGuess::Zero)
}

/// ∂_ρ ω + 2i = (i/L) ∂_ρ̂ u at ρ̂ = 0, estimated by the one-sided
/// second-order difference and divided by i.
fn neumann_estimate(g: &CompositeGrid, u: &[f64]) -> f64 {
    if g.spec.coupling == Coupling::Doubled {
        return 0.0;
    }
    let mut m = 0.0f64;
    for an in &g.annuli {
        for b in 0..g.n_phi as i64 {
            let v = |a| u[g.ann_index(an, a, b)];
            let d = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * g.d_rhohat);
            m = m.max((d / g.log_i).abs());
        }
    }
    m
}

impl ConformalSolution {
    pub fn i(&self) -> f64 {
        self.grid.domain.i
    }

    /// ω at a Cartesian node of a copy (None on holes).
    pub fn cart(&self, copy: usize, j: usize, l: usize) -> Option<f64> {
        let k = self.grid.cart_node(copy, j, l);
        (k != usize::MAX).then(|| self.values[k])
    }

    /// u = ω + 2 log ρ at annulus node (a, b).
    pub fn ann(&self, ann: usize, a: i64, b: i64) -> f64 {
        self.values[self.grid.ann_index(&self.grid.annuli[ann], a, b)]
    }

    /// ω at an arbitrary point of copy 0: annulus interpolation inside the
    /// overlap, Cartesian otherwise.
    pub fn omega_at(&self, x: [f64; 2]) -> Result<f64> {
        let g = &self.grid;
        let (p, d, rho) = g.domain.nearest(x);
        if rho < 1.0 / g.domain.i {
            return Err(AlhError::Domain(format!("point at ρ = {rho} lies inside the excised disc")));
        }
        if rho <= 0.5 * (g.rho_c + g.rho_out) {
            let an = &g.annuli[p];
            let (idx, w) = g.annulus_stencil(an, g.rhohat_of(rho), d[1].atan2(d[0]))?;
            let uu: f64 = idx.iter().zip(&w).map(|(&k, w)| w * self.values[k]).sum();
            Ok(uu - 2.0 * rho.ln())
        } else {
            let (idx, w) = g.cartesian_stencil(0, x, false)?;
            Ok(idx.iter().zip(&w).map(|(&k, w)| w * self.values[k]).sum())
        }
    }

    /// Max |ω - ω'| over the first copy's Cartesian nodes and annuli.
    pub fn max_difference(&self, other: &ConformalSolution) -> Result<f64> {
        let (g, h) = (&self.grid, &other.grid);
        if g.n != h.n || g.n_r != h.n_r || g.annuli.len() != h.annuli.len() {
            return Err(AlhError::Dimension { expected: g.n, got: h.n });
        }
        let mut m = 0.0f64;
        for l in 0..g.n {
            for j in 0..g.n {
                if let (Some(a), Some(b)) = (self.cart(0, j, l), other.cart(0, j, l)) {
                    m = m.max((a - b).abs());
                }
            }
        }
        for k in 0..g.annuli.len() {
            for a in 0..=g.n_r as i64 {
                for b in 0..g.n_phi as i64 {
                    m = m.max((self.ann(k, a, b) - other.ann(k, a, b)).abs());
                }
            }
        }
        Ok(m)
    }
}
