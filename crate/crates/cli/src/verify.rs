//! The verification suite: nine criteria, each a list of checks with an
//! optional runtime budget.

use crate::bundle::Check;
use crate::commands::{hm_closed_form, kid_family_residual, run};
use crate::config::{Command, FamilyKind, RunConfig};
use alh_core::conformal::{
    aspect_integral_identity, default_x_ladder, gauge_expansion_check, mass_aspect_trace_defect,
    transform_mass_aspect, BoundaryConformalData, BoundaryGeometry, ConformalFactor, FGMetric,
};
use alh_core::gluemass::{genus_bookkeeping, hm_bracket, hm_glued_limit_mass, GenusScheme};
use alh_core::hypgeo::{
    ball_reflection, glue_transition, lambda_map, HyperbolicHyperplane, ModelPoint, Sign,
};
use alh_core::kids::StaticPotential;
use alh_core::mass::{
    lorentz_add, lorentz_boost, mass_aspect_formula, mass_report, mass_u_flux, minkowski_square, EnergyMomentum,
    LinearCombination, MassAspect, MassFormula, MassSetup, DEFAULT_LADDER,
};
use alh_core::metrics::{bk_spacetime, einstein_residual, hm_spacetime, horizon_radius};
use alh_core::yamabe::{
    c1, comparison_check, gauss_bonnet, limit_profile, min_density, neck_length, neck_minimality,
    neck_pde_residual, solve, sup_inverse_density, PuncturedTorusDomain, DEFAULT_I_LADDER,
};
use alh_core::{BKParams, Boundary, HMParams};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

pub const NAMES: [&str; 9] = [
    "HM mass closed form",
    "Einstein and KID residuals",
    "explicit neck",
    "Yamabe solve, one puncture",
    "Hempel constants",
    "mass bracket",
    "higher genus",
    "conformal rescaling",
    "property suites",
];

/// Runtime budgets in seconds; criterion 4 budgets each solve instead.
const BUDGET: [Option<f64>; 9] = [Some(10.0), Some(30.0), None, None, None, None, None, None, None];
const SOLVE_BUDGET: f64 = 300.0;
/// Budget for the full suite.
pub const SUITE_BUDGET: f64 = 900.0;

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Coarser grids for criteria 4, 6 and 7.
    pub quick: bool,
    pub seed: u64,
    /// Criteria to run; all when empty.
    pub only: Vec<u8>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { quick: false, seed: crate::config::DEFAULT_SEED, only: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Wall time, kept out of the JSON so repeated runs serialize identically.
    #[serde(skip)]
    pub seconds: f64,
}

impl Outcome {
    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            format!("{} checks passed", self.checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        }
    }

    /// One line for logs.
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("[{tag}] criterion {}: {} ({:.1} s) - {}", self.id, self.name, self.seconds, self.summary())
    }
}

/// Runs the selected criteria, logging each line to stderr as it finishes.
pub fn run_suite(opts: &SuiteOptions) -> Vec<Outcome> {
    (1..=9u8)
        .filter(|k| opts.only.is_empty() || opts.only.contains(k))
        .map(|k| {
            let o = run_criterion(k, opts);
            eprintln!("{}", o.line());
            o
        })
        .collect()
}

pub fn run_criterion(id: u8, opts: &SuiteOptions) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => c1_hm_mass(),
        2 => c2_residuals(opts.seed),
        3 => c3_neck(),
        4 => c4_yamabe(opts.quick),
        5 => c5_hempel(),
        6 => c6_bracket(opts.quick),
        7 => c7_genus(opts.quick),
        8 => c8_conformal(opts.seed),
        9 => c9_properties(opts.seed),
        _ => Err(format!("no criterion {id}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let mut checks = result.unwrap_or_else(|e| vec![Check::new("error", false, e)]);
    if let Some(b) = BUDGET[(id - 1) as usize] {
        checks.push(Check::new("runtime", seconds < b, format!("budget {b} s")));
    }
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    Outcome { id, name: NAMES[(id - 1) as usize], pass, checks, seconds }
}

type Checks = Result<Vec<Check>, String>;

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1_hm_mass() -> Checks {
    let mut out = Vec::new();
    for n in [3usize, 4, 5] {
        for m_c in [0.5, 1.0, 2.0] {
            let s = MassSetup::hm(&HMParams::new(n, m_c).map_err(e2s)?);
            let v = s.background_potential();
            let target = hm_closed_form(n, m_c);
            for f in MassFormula::ALL {
                let r = mass_report(f, &s, &v, &DEFAULT_LADDER).map_err(e2s)?;
                out.push(Check::near(format!("n={n} m_c={m_c} {f:?}"), r.limit, target, 1e-5));
            }
        }
    }
    Ok(out)
}

fn c2_residuals(seed: u64) -> Checks {
    let draws = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bk_worst: f64 = 0.0;
    let mut hm_worst: f64 = 0.0;
    for _ in 0..draws {
        let n = rng.gen_range(3..=5usize);
        let k = rng.gen_range(-1..=1i32);
        let m_c = rng.gen_range(0.1..2.0);
        let p = BKParams::with_default_boundary(n, k, m_c).map_err(e2s)?;
        let rh = horizon_radius(&p).map(|h| h.r0).unwrap_or(0.0);
        let mut x = vec![rng.gen_range(-1.0..1.0)];
        x.extend(alh_core::kids::random_point(&p.boundary, &mut rng, rh + 0.3, rh + 6.0));
        bk_worst = bk_worst.max(einstein_residual(&bk_spacetime(&p), &x).map_err(e2s)?.max());

        let q = HMParams::new(n, m_c).map_err(e2s)?;
        let mut periods = vec![q.psi_period];
        periods.extend(q.theta_periods.iter().copied());
        let mut y = vec![rng.gen_range(-1.0..1.0)];
        y.extend(alh_core::kids::random_point(&Boundary::FlatTorus { periods }, &mut rng, q.r0() + 0.3, q.r0() + 6.0));
        hm_worst = hm_worst.max(einstein_residual(&hm_spacetime(&q), &y).map_err(e2s)?.max());
    }
    let mut out = vec![
        Check::below("BK spacetime Einstein residual", bk_worst, 1e-8),
        Check::below("HM spacetime Einstein residual", hm_worst, 1e-8),
    ];
    let families: [(&str, FamilyKind, usize, i32, f64); 8] = [
        ("BK generic n=3 k=1", FamilyKind::Bk, 3, 1, 1.0),
        ("BK generic n=4 k=-1", FamilyKind::Bk, 4, -1, 0.3),
        ("BK m_c=0 k=0", FamilyKind::BkZero, 3, 0, 0.0),
        ("BK m_c=0 k=1", FamilyKind::BkZero, 3, 1, 0.0),
        ("BK m_c=0 k=-1", FamilyKind::BkZero, 4, -1, 0.0),
        ("HM n=3", FamilyKind::Hm, 3, 0, 1.0),
        ("HM n=4", FamilyKind::Hm, 4, 0, 0.5),
        ("n=2 family", FamilyKind::N2, 2, 0, 0.7),
    ];
    for (name, kind, n, k, m_c) in families {
        let w = kid_family_residual(kind, n, k, m_c, draws, seed).map_err(e2s)?;
        out.push(Check::below(format!("KID {name}"), w, 1e-8));
    }
    for m_c in [-0.5, 0.0] {
        let w = kid_family_residual(FamilyKind::N2, 2, 0, m_c, draws, seed).map_err(e2s)?;
        out.push(Check::below(format!("KID n=2 family m_c={m_c}"), w, 1e-8));
    }
    Ok(out)
}

fn c3_neck() -> Checks {
    let mut out = Vec::new();
    for i in [16.0f64, 64.0, 1024.0] {
        let mut worst: f64 = 0.0;
        for j in 0..200 {
            // geometric samples of [1/i, 1)
            let rho = (-(i.ln()) * (1.0 - j as f64 / 200.0)).exp();
            worst = worst.max(neck_pde_residual(i, rho).map_err(e2s)?.abs());
        }
        out.push(Check::below(format!("PDE residual i={i}"), worst, 1e-8));
        out.push(Check::below(format!("minimality i={i}"), neck_minimality(i).map_err(e2s)?.abs(), 1e-10));
    }
    Ok(out)
}

fn c4_yamabe(quick: bool) -> Checks {
    let grids: [usize; 3] = if quick { [64, 128, 256] } else { [128, 256, 512] };
    let mut out = Vec::new();
    for i in [16.0, 64.0] {
        let domain = PuncturedTorusDomain::standard(1, i).map_err(e2s)?;
        let mut gbs = Vec::new();
        let mut last = None;
        for &n in &grids {
            let t = Instant::now();
            let s = solve(&domain, n).map_err(e2s)?;
            let dt = t.elapsed().as_secs_f64();
            out.push(Check::new(format!("i={i} N={n} solve time"), dt < SOLVE_BUDGET, format!("{dt:.1} s")));
            gbs.push(gauss_bonnet(&s));
            last = Some(s);
        }
        let s = last.expect("three grids");
        let target = 2.0 * PI;
        out.push(Check::near(format!("i={i} Gauss-Bonnet"), gbs[2], target, 5e-3 * target));
        let defects: Vec<f64> = gbs.iter().map(|g| (g - target).abs()).collect();
        let order = (defects[1] / defects[2]).log2();
        out.push(Check::new(format!("i={i} convergence order"), order >= 1.9, format!("{order:.3} from {defects:?}")));
        let cmp = comparison_check(&s);
        out.push(Check::new(
            format!("i={i} comparison"),
            cmp.pass,
            format!("excess {} vs truncation {}", cmp.max_excess, cmp.truncation),
        ));
        let nl = neck_length(&s);
        out.push(Check::new(format!("i={i} neck length"), nl.length <= nl.bound + 1e-3, format!("{} <= {}", nl.length, nl.bound)));
    }
    Ok(out)
}

fn c5_hempel() -> Checks {
    Ok(vec![
        Check::near("C1", c1(), 4.37688, 1e-4),
        Check::near("min 2ρ", min_density(), 1.695, 1e-3),
        Check::near("sup e^{-ω/2}", sup_inverse_density(), 0.59, 1e-2),
    ])
}

fn c6_bracket(quick: bool) -> Checks {
    let b = hm_bracket(1.0).map_err(e2s)?;
    let mut out = vec![
        Check::near("lower", b.lower, -1.18, 0.02),
        Check::near("upper", b.upper, -0.67, 0.02),
        Check::near("weak lower", b.weak_lower, -4.02, 0.05),
    ];
    let n = if quick { 64 } else { 128 };
    let domain = PuncturedTorusDomain::standard(1, DEFAULT_I_LADDER[0]).map_err(e2s)?;
    let lp = limit_profile(&domain, &DEFAULT_I_LADDER, n).map_err(e2s)?;
    let m = hm_glued_limit_mass(1.0, &lp);
    out.push(Check::new("limit mass inside bracket", b.lower < m && m < b.upper, format!("{} < {m} < {}", b.lower, b.upper)));
    out.push(Check::new("limit mass negative", m < 0.0, format!("{m}")));
    Ok(out)
}

fn c7_genus(quick: bool) -> Checks {
    // three necks need at least 128 nodes for the patches to overlap
    let n = if quick { 128 } else { 256 };
    let mut out = Vec::new();
    for necks in 1..=3usize {
        let r = genus_bookkeeping(necks, GenusScheme::SymmetricDouble).map_err(e2s)?;
        let nn = necks as i64;
        out.push(Check::new(format!("N={necks} genus"), r.genus == nn + 1, format!("{}", r.genus)));
        out.push(Check::new(format!("N={necks} area 4Nπ"), r.area_over_pi == 4 * nn && r.area_over_pi == -2 * r.euler, format!("{}π", r.area_over_pi)));
        let s = solve(&PuncturedTorusDomain::standard(necks, 64.0).map_err(e2s)?, n).map_err(e2s)?;
        let target = 2.0 * PI * necks as f64;
        out.push(Check::near(format!("N={necks} solver ∫e^ω = 2Nπ"), gauss_bonnet(&s), target, 5e-3 * target));
    }
    Ok(out)
}

fn random_torus(d: usize, amp: f64, res: usize, seed: u64) -> Result<BoundaryConformalData, String> {
    let periods = vec![1.0; d];
    let phi = ConformalFactor::random_exp_trig(&periods, 3, 2, amp, seed);
    BoundaryConformalData::new(BoundaryGeometry::FlatTorus { periods }, phi, res).map_err(e2s)
}

fn aspect(d: usize) -> impl Fn(&[f64]) -> DMatrix<f64> {
    move |x: &[f64]| DMatrix::from_fn(d, d, |a, b| (1.0 + (a + b) as f64) * (2.0 * PI * x[(a + b) % d]).cos())
}

fn c8_conformal(seed: u64) -> Checks {
    let mut out = Vec::new();
    let data = random_torus(2, 0.15, 32, seed).map_err(e2s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
    let rep = gauge_expansion_check(&FGMetric::hyperbolic(3, 0.0), &data, &starts, &default_x_ladder()).map_err(e2s)?;
    out.push(Check::new("x̄ remainder order", rep.xbar_order >= 3.5, format!("{}", rep.xbar_order)));
    out.push(Check::new("r̄ remainder order", rep.rbar_order >= 3.5, format!("{}", rep.rbar_order)));

    let mu = data.mass_aspect(3, aspect(2)).map_err(e2s)?;
    let bar = transform_mass_aspect(&data, &mu, 3).map_err(e2s)?;
    let mut worst = 0.0f64;
    for ((x, m), mb) in data.nodes().iter().zip(&mu.mu).zip(&bar.mu) {
        let psi = 1.0 / data.phi.value(x).map_err(e2s)?;
        worst = worst.max((mb - m * psi).amax());
    }
    out.push(Check::below("n=3 μ̄ = ψμ", worst, 1e-8));
    let (l, r) = aspect_integral_identity(&data, &mu, 3).map_err(e2s)?;
    out.push(Check::below("n=3 integral identity", (l - r).abs() / l.abs().max(1.0), 1e-8));

    let mut trace: f64 = 0.0;
    for s in 0..4 {
        let d4 = random_torus(3, 0.2, 12, seed.wrapping_add(s)).map_err(e2s)?;
        let mu4 = d4.mass_aspect(4, aspect(3)).map_err(e2s)?;
        trace = trace.max(mass_aspect_trace_defect(&d4, &mu4).map_err(e2s)?);
    }
    out.push(Check::below("n=4 trace", trace, 1e-8));
    Ok(out)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn c9_properties(seed: u64) -> Checks {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // Isometry pullbacks of Λ maps, their inverses and gluing transitions.
    let mut worst: f64 = 0.0;
    let mut mirror: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=4usize);
        let mut hp = || {
            let c: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let r = rng.gen_range(0.3..3.0);
            (c, r)
        };
        let (c1_, r1) = hp();
        let (c2_, r2) = hp();
        let h1 = HyperbolicHyperplane::new(c1_, r1).map_err(e2s)?;
        let h2 = HyperbolicHyperplane::new(c2_, r2).map_err(e2s)?;
        let plus = lambda_map(&h1, Sign::Plus);
        let minus = lambda_map(&h1, Sign::Minus);
        let t = glue_transition(&plus, &lambda_map(&h2, Sign::Minus)).map_err(e2s)?;
        let mut coords: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
        coords.push(rng.gen_range(0.05..3.0));
        let p = ModelPoint::half_space(coords).map_err(e2s)?;
        for m in [&plus, &minus, &t] {
            worst = worst.max(m.pullback_residual(&p).map_err(e2s)?);
        }
        let q = plus.apply(&p).map_err(e2s)?;
        worst = worst.max(plus.inverse().pullback_residual(&q).map_err(e2s)?);
        let via = plus.then(&ball_reflection(n)).map_err(e2s)?.apply(&p).map_err(e2s)?;
        let direct = minus.apply(&p).map_err(e2s)?;
        mirror = mirror.max(via.coords.iter().zip(&direct.coords).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    out.push(Check::below("isometry pullbacks", worst, 1e-10));
    out.push(Check::below("Λ₊ then reflection = Λ₋", mirror, 1e-10));

    // Lorentz additivity commutes with a global boost and keeps the
    // Minkowski square of the total.
    let mut lor: f64 = 0.0;
    for _ in 0..50 {
        let boost = |rng: &mut ChaCha8Rng| {
            let mut l = DMatrix::<f64>::identity(4, 4);
            for axis in 1..4 {
                l = lorentz_boost(4, axis, rng.gen_range(-1.0..1.0)) * l;
            }
            l
        };
        let (l1, l2, g) = (boost(&mut rng), boost(&mut rng), boost(&mut rng));
        let m1: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m2: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (e1, e2) = (EnergyMomentum::Vector(m1), EnergyMomentum::Vector(m2));
        let base = lorentz_add(&l1, &e1, &l2, &e2).map_err(e2s)?;
        let moved = lorentz_add(&(&g * &l1), &e1, &(&g * &l2), &e2).map_err(e2s)?;
        let (EnergyMomentum::Vector(b), EnergyMomentum::Vector(m)) = (base, moved) else {
            return Err("vector sum expected".into());
        };
        let gb = &g * DVector::from_column_slice(&b);
        let scale = gb.amax().max(1.0);
        lor = lor.max(gb.iter().zip(&m).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale);
        lor = lor.max(rel(minkowski_square(&b), minkowski_square(&m)));
    }
    out.push(Check::below("Lorentz additivity invariance", lor, 1e-10));

    // Mass is linear in the potential and in the aspect.
    let p = BKParams::new(3, 1, 1.0, Boundary::RoundSphere { dim: 2 }).map_err(e2s)?;
    let s = MassSetup::bk(&p);
    let v1 = s.background_potential();
    let bg = BKParams { m_c: 0.0, ..p.clone() };
    let v2 = StaticPotential::BKZeroMass { params: bg, c_tilde: 0.4, c_hat: -0.2, omega: vec![0.3, -0.1, 0.25] };
    let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let mut lin: f64 = 0.0;
    for r in [8.0, 16.0] {
        let combo = LinearCombination(vec![(a, v1.clone()), (b, v2.clone())]);
        let lhs = mass_u_flux(&s, &combo, r).map_err(e2s)?;
        let rhs = a * mass_u_flux(&s, &v1, r).map_err(e2s)? + b * mass_u_flux(&s, &v2, r).map_err(e2s)?;
        lin = lin.max(rel(lhs, rhs));
        let asp = MassAspect::at_radius(&s, r).map_err(e2s)?;
        lin = lin.max(rel(mass_aspect_formula(&asp.scaled(a), 3), a * mass_aspect_formula(&asp, 3)));
    }
    out.push(Check::below("mass linearity", lin, 1e-10));

    // Determinism: identical inputs give bitwise identical outputs.
    let hm = MassSetup::hm(&HMParams::new(3, 1.0).map_err(e2s)?);
    let v = hm.background_potential();
    let r1 = mass_report(MassFormula::Aspect, &hm, &v, &DEFAULT_LADDER).map_err(e2s)?;
    let r2 = mass_report(MassFormula::Aspect, &hm, &v, &DEFAULT_LADDER).map_err(e2s)?;
    let d = PuncturedTorusDomain::standard(1, 16.0).map_err(e2s)?;
    let (s1, s2) = (solve(&d, 64).map_err(e2s)?, solve(&d, 64).map_err(e2s)?);
    let t1 = random_torus(2, 0.2, 16, seed).map_err(e2s)?;
    let t2 = random_torus(2, 0.2, 16, seed).map_err(e2s)?;
    let same_conf = t1.nodes().iter().all(|x| t1.phi.value(x).ok() == t2.phi.value(x).ok());
    let mut cfg = RunConfig::new(Command::Mass);
    cfg.seed = seed;
    let j1 = run(&cfg).map_err(e2s)?.to_json_without_timestamp();
    let j2 = run(&cfg).map_err(e2s)?.to_json_without_timestamp();
    out.push(Check::new("determinism: mass ladder", r1 == r2, ""));
    out.push(Check::new("determinism: Yamabe solve", s1.values == s2.values, ""));
    out.push(Check::new("determinism: seeded conformal factor", same_conf, ""));
    out.push(Check::new("determinism: JSON bundle", j1 == j2, ""));
    Ok(out)
}
