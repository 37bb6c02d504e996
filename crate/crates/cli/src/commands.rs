//! One function per subcommand, each producing a [`ResultBundle`].

use crate::bundle::{Check, ResultBundle, Table};
use crate::config::{Command, FamilyKind, RunConfig};
use crate::{verify, CliError};
use alh_core::conformal::{
    aspect_integral_identity, default_x_ladder, gauge_expansion_check, kbar, mass_aspect_trace_defect,
    obstruction_residual, transform_mass_aspect, BoundaryConformalData, BoundaryGeometry, ConformalFactor, FGMetric,
};
use alh_core::gluemass::{genus_bookkeeping, hm_bracket, hm_glued_limit_mass, GenusScheme};
use alh_core::kids::{bk_zero_mass_potentials, kid_residual, n2_potentials, random_point, StaticPotential};
use alh_core::mass::{flux_normalization, mass_report, MassFormula, MassSetup};
use alh_core::metrics::{
    bk_spacetime, bk_spatial, curvature, einstein_residual, hm_spacetime, hm_spatial, horizon_radius, ChartMetric,
};
use alh_core::yamabe::{
    comparison_check, gauss_bonnet, hempel_bounds, limit_profile, neck_length, solve_with, GridSpec, InitialGuess,
    PuncturedTorusDomain, DEFAULT_I_LADDER,
};
use alh_core::{BKParams, Boundary, HMParams};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::f64::consts::PI;

type Out = Result<ResultBundle, CliError>;

pub fn run(cfg: &RunConfig) -> Out {
    cfg.validate()?;
    match cfg.command {
        Command::Curvature => run_curvature(cfg),
        Command::KidCheck => run_kid_check(cfg),
        Command::Mass => run_mass(cfg),
        Command::Yamabe => run_yamabe(cfg),
        Command::GlueMass => run_glue_mass(cfg),
        Command::GlueGenus => run_glue_genus(cfg),
        Command::Conformal => run_conformal(cfg),
        Command::VerifyAll => run_verify_all(cfg),
    }
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("results are built from json objects"),
    }
}

fn bk_params(cfg: &RunConfig) -> Result<BKParams, CliError> {
    let f = &cfg.family;
    Ok(BKParams::with_default_boundary(f.n, f.k, f.m_c)?)
}

fn hm_params(cfg: &RunConfig) -> Result<HMParams, CliError> {
    Ok(HMParams::new(cfg.family.n, cfg.family.m_c)?)
}

/// A chart point well outside the horizon, in the slice coordinates.
fn default_point(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let f = &cfg.family;
    Ok(match f.kind {
        FamilyKind::Hm => {
            let p = hm_params(cfg)?;
            let mut x = vec![2.0 * p.r0() + 1.0, 0.37 * p.psi_period];
            x.extend(p.theta_periods.iter().map(|t| 0.61 * t));
            x
        }
        _ => {
            let p = bk_params(cfg)?;
            let r = horizon_radius(&p).map(|h| h.r0).unwrap_or(0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            random_point(&p.boundary, &mut rng, 2.0 * r + 1.0, 2.0 * r + 1.5)
        }
    })
}

fn metric_for(cfg: &RunConfig) -> Result<ChartMetric, CliError> {
    let f = &cfg.family;
    Ok(match (f.kind, f.spacetime) {
        (FamilyKind::Hm, false) => hm_spatial(&hm_params(cfg)?),
        (FamilyKind::Hm, true) => hm_spacetime(&hm_params(cfg)?),
        (FamilyKind::Bk, false) => bk_spatial(&bk_params(cfg)?),
        (FamilyKind::Bk, true) => bk_spacetime(&bk_params(cfg)?),
        (k, _) => return Err(CliError::Config(format!("at `family.kind`: {k:?} is a potential family, not a metric"))),
    })
}

fn run_curvature(cfg: &RunConfig) -> Out {
    let g = metric_for(cfg)?;
    let mut x = match &cfg.family.point {
        Some(p) => p.clone(),
        None => default_point(cfg)?,
    };
    if cfg.family.spacetime && cfg.family.point.is_none() {
        x.insert(0, 0.0);
    }
    if x.len() != g.dim() {
        return Err(CliError::Config(format!("at `family.point`: expected {} coordinates, got {}", g.dim(), x.len())));
    }
    let c = curvature(&g, &x)?;
    let n = cfg.family.n as f64;
    let mut checks = Vec::new();
    let mut res = json!({ "point": x, "scalar": c.scalar, "ricci": c.ricci });
    if cfg.family.spacetime {
        let e = einstein_residual(&g, &x)?;
        res["einstein_residual"] = json!({ "ricci": e.ricci, "scalar": e.scalar, "max": e.max() });
        checks.push(Check::below("einstein residual", e.max(), 1e-8));
    } else {
        // time-symmetric vacuum slice: R = -n(n-1)
        let target = -n * (n - 1.0);
        res["scalar_target"] = json!(target);
        checks.push(Check::near("scalar curvature", c.scalar, target, 1e-8 * target.abs()));
    }
    Ok(ResultBundle::new(cfg, obj(res), checks, Vec::new()))
}

/// Max KID residual of random members of the configured potential family.
pub fn kid_family_residual(kind: FamilyKind, n: usize, k: i32, m_c: f64, draws: usize, seed: u64) -> Result<f64, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    match kind {
        FamilyKind::BkZero => {
            let p = BKParams::with_default_boundary(n, k, 0.0)?;
            worst = bk_zero_mass_potentials(n, k, p.boundary)?.verify(draws, seed)?;
        }
        FamilyKind::Bk => {
            let p = BKParams::with_default_boundary(n, k, m_c)?;
            let g = bk_spatial(&p);
            let rh = horizon_radius(&p).map(|h| h.r0).unwrap_or(0.0);
            for _ in 0..draws {
                let v = StaticPotential::BKGeneric { params: p.clone(), c_tilde: rng.gen_range(-2.0..2.0) };
                let x = random_point(&p.boundary, &mut rng, rh + 0.5, rh + 6.0);
                worst = worst.max(kid_residual(&g, &v, &x)?.max);
            }
        }
        FamilyKind::Hm => {
            let p = HMParams::new(n, m_c)?;
            let g = hm_spatial(&p);
            let mut periods = vec![p.psi_period];
            periods.extend(p.theta_periods.iter().copied());
            let b = Boundary::FlatTorus { periods };
            for _ in 0..draws {
                let c_i = (0..n - 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v = StaticPotential::HMFamily { params: p.clone(), c1: rng.gen_range(-2.0..2.0), c_i };
                let x = random_point(&b, &mut rng, p.r0() + 0.5, p.r0() + 6.0);
                worst = worst.max(kid_residual(&g, &v, &x)?.max);
            }
        }
        FamilyKind::N2 => {
            let fam = n2_potentials(m_c);
            let r_lo = (2.0 * m_c).max(0.0).sqrt() + 0.5;
            let b = Boundary::FlatTorus { periods: vec![2.0 * PI] };
            for _ in 0..draws {
                let v = fam.potential(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let x = random_point(&b, &mut rng, r_lo, r_lo + 6.0);
                worst = worst.max(kid_residual(&v.metric(), &v, &x)?.max);
            }
        }
    }
    Ok(worst)
}

fn run_kid_check(cfg: &RunConfig) -> Out {
    let f = &cfg.family;
    let worst = kid_family_residual(f.kind, f.n, f.k, f.m_c, cfg.draws, cfg.seed)?;
    let res = json!({ "family": f.kind, "draws": cfg.draws, "max_residual": worst });
    Ok(ResultBundle::new(cfg, obj(res), vec![Check::below("kid residual", worst, 1e-8)], Vec::new()))
}

/// -2 m_c times the flux normalisation, the HM closed form.
pub fn hm_closed_form(n: usize, m_c: f64) -> f64 {
    -2.0 * flux_normalization(n) * m_c
}

fn run_mass(cfg: &RunConfig) -> Out {
    let f = &cfg.family;
    let (setup, closed) = match f.kind {
        FamilyKind::Hm => (MassSetup::hm(&hm_params(cfg)?), Some(hm_closed_form(f.n, f.m_c))),
        FamilyKind::Bk => (MassSetup::bk(&bk_params(cfg)?), None),
        k => return Err(CliError::Config(format!("at `family.kind`: no mass evaluator for {k:?}"))),
    };
    let v = setup.background_potential();
    let ladder = &cfg.grid.ladder;
    let reports = MassFormula::ALL
        .iter()
        .map(|&fm| mass_report(fm, &setup, &v, ladder))
        .collect::<alh_core::Result<Vec<_>>>()?;
    let mass = reports[0].limit;
    let mut checks = Vec::new();
    match closed {
        Some(m) => {
            for r in &reports {
                checks.push(Check::near(format!("{:?} vs closed form", r.formula), r.limit, m, 1e-5 * m.abs().max(1.0)));
            }
        }
        None => {
            for r in &reports[1..] {
                checks.push(Check::near(format!("{:?} vs UFlux", r.formula), r.limit, mass, 1e-5 * mass.abs().max(1.0)));
            }
        }
    }
    let mut rows = Vec::new();
    for (j, r) in ladder.iter().enumerate() {
        let mut row = vec![*r];
        row.extend(reports.iter().map(|rep| rep.values[j]));
        rows.push(row);
    }
    let table = Table {
        kind: "mass-ladder",
        header: ["R", "u_flux", "frame", "aspect", "ricci"].iter().map(|s| s.to_string()).collect(),
        rows,
    };
    let res = json!({
        "family": f.kind,
        "n": f.n,
        "m_c": f.m_c,
        "mass": mass,
        "closed_form": closed,
        "reports": reports,
    });
    Ok(ResultBundle::new(cfg, obj(res), checks, vec![table]))
}

fn run_yamabe(cfg: &RunConfig) -> Out {
    let g = &cfg.grid;
    let domain = PuncturedTorusDomain::standard(g.punctures, g.i)?;
    let spec = if g.doubled { GridSpec::doubled(g.n) } else { GridSpec::new(g.n) };
    let s = solve_with(&domain, spec, InitialGuess::Zero)?;
    let copies = s.grid.copies as f64;
    let gb = gauss_bonnet(&s);
    let target = 2.0 * PI * g.punctures as f64 * copies;
    let nl = neck_length(&s);
    let cmp = comparison_check(&s);
    let mut checks = vec![
        Check::near("gauss-bonnet", gb, target, 5e-3 * target),
        Check::below("pde residual", s.residual, 1e-8),
        Check::new("neck length", nl.length <= nl.bound + 1e-3, format!("{} <= {}", nl.length, nl.bound)),
    ];
    if g.punctures == 1 && !g.doubled {
        checks.push(Check::new(
            "comparison",
            cmp.pass,
            format!("excess {} vs truncation {}", cmp.max_excess, cmp.truncation),
        ));
    }
    let n = s.grid.n;
    let mut rows = Vec::new();
    for l in 0..n {
        for j in 0..n {
            if let Some(w) = s.cart(0, j, l) {
                let [x, y] = s.grid.node_xy(j, l);
                rows.push(vec![x, y, w]);
            }
        }
    }
    let table = Table { kind: "omega-profile", header: vec!["x".into(), "y".into(), "omega".into()], rows };
    let res = json!({
        "i": g.i,
        "punctures": g.punctures,
        "grid": g.n,
        "doubled": g.doubled,
        "gauss_bonnet": gb,
        "gauss_bonnet_target": target,
        "doubled_surface_area": 4.0 * PI * g.punctures as f64,
        "residual": s.residual,
        "neumann_residual": s.neumann_residual,
        "iterations": s.iterations,
        "neck_length": nl,
        "comparison": cmp,
    });
    Ok(ResultBundle::new(cfg, obj(res), checks, vec![table]))
}

fn run_glue_mass(cfg: &RunConfig) -> Out {
    let m_c = cfg.family.m_c;
    let br = hm_bracket(m_c)?;
    let mut checks = vec![Check::new("bracket ordered", br.weak_lower < br.lower && br.lower < br.upper, format!("{br:?}"))];
    let samples = cfg.grid.bracket_samples;
    let rhos: Vec<f64> = (0..samples).map(|j| 0.01 + 0.49 * j as f64 / (samples - 1) as f64).collect();
    let mut header: Vec<String> = ["rho", "hempel_lower", "hempel_upper"].iter().map(|s| s.to_string()).collect();
    let mut res = json!({ "m_c": m_c, "bracket": br, "mass": Value::Null });
    let lp = if cfg.grid.limit {
        let domain = PuncturedTorusDomain::standard(1, DEFAULT_I_LADDER[0])?;
        Some(limit_profile(&domain, &DEFAULT_I_LADDER, cfg.grid.n)?)
    } else {
        None
    };
    if let Some(lp) = &lp {
        let m = hm_glued_limit_mass(m_c, lp);
        res["mass"] = json!(m);
        res["diagnostics"] = json!({
            "grid": cfg.grid.n,
            "ladder": lp.ladder,
            "area": lp.area,
            "inverse_density_integral": lp.inverse_density_integral,
            "min_density": lp.min_density,
            "extrapolation_error": lp.error,
            "last_step": lp.last_step,
            "cusp": lp.cusp,
            "warning": lp.warning,
        });
        checks.push(Check::new("inside bracket", br.lower < m && m < br.upper, format!("{} < {m} < {}", br.lower, br.upper)));
        checks.push(Check::new("negative", m < 0.0, format!("{m}")));
        header.push("density".into());
    }
    let mut rows = Vec::with_capacity(samples);
    for &rho in &rhos {
        let (lo, hi) = hempel_bounds(rho)?;
        let mut row = vec![rho, lo, hi];
        if let Some(lp) = &lp {
            row.push((0.5 * lp.omega([rho, 0.0])?).exp());
        }
        rows.push(row);
    }
    let table = Table { kind: "bracket-curve", header, rows };
    Ok(ResultBundle::new(cfg, obj(res), checks, vec![table]))
}

fn run_glue_genus(cfg: &RunConfig) -> Out {
    let n = cfg.grid.necks;
    let rep = genus_bookkeeping(n, GenusScheme::SymmetricDouble)?;
    let nn = n as i64;
    let mut checks = vec![
        Check::new("genus", rep.genus == nn + 1, format!("{} == {}", rep.genus, nn + 1)),
        Check::new("area 4Nπ", rep.area_over_pi == 4 * nn, format!("{}π", rep.area_over_pi)),
        Check::new("area = -2πχ", rep.area_over_pi == -2 * rep.euler, format!("χ = {}", rep.euler)),
    ];
    let mut res = json!({ "report": rep });
    if n <= 4 {
        let domain = PuncturedTorusDomain::standard(n, cfg.grid.i)?;
        let s = solve_with(&domain, GridSpec::new(cfg.grid.n), InitialGuess::Zero)?;
        let gb = gauss_bonnet(&s);
        let target = 2.0 * PI * n as f64;
        checks.push(Check::near("solver area 2Nπ", gb, target, 5e-3 * target));
        res["solver_area"] = json!(gb);
        res["solver_target"] = json!(target);
        res["note"] = json!(format!(
            "the punctured torus carries 2Nπ = {target}; the doubled surface carries 4Nπ = {}",
            2.0 * target
        ));
    }
    Ok(ResultBundle::new(cfg, obj(res), checks, Vec::new()))
}

/// Smooth tangential mass aspect with O(1) entries.
fn test_aspect(d: usize) -> impl Fn(&[f64]) -> DMatrix<f64> {
    move |x: &[f64]| {
        DMatrix::from_fn(d, d, |a, b| {
            let (lo, hi) = (a.min(b), a.max(b));
            (1.0 + (lo + hi) as f64) * (2.0 * PI * x[(lo + hi) % d]).cos() + 0.3 * (lo == hi) as u8 as f64
        })
    }
}

fn run_conformal(cfg: &RunConfig) -> Out {
    let c = &cfg.conformal;
    let n = c.n;
    let d = n - 1;
    let periods = vec![1.0; d];
    let phi = ConformalFactor::random_exp_trig(&periods, c.modes, c.max_freq, c.amplitude, cfg.seed);
    let data = BoundaryConformalData::new(BoundaryGeometry::FlatTorus { periods: periods.clone() }, phi, c.resolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let starts: Vec<Vec<f64>> = (0..c.rays).map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
    let ladder = default_x_ladder();
    let rep = gauge_expansion_check(&FGMetric::hyperbolic(n, 0.0), &data, &starts, &ladder)?;
    let mut checks = vec![
        Check::new("x̄ remainder order", rep.xbar_order >= 3.5, format!("{}", rep.xbar_order)),
        Check::new("r̄ remainder order", rep.rbar_order >= 3.5, format!("{}", rep.rbar_order)),
    ];
    if let Some(e) = rep.coefficient_errors {
        checks.push(Check::below("φ₂ fit", e[0], 1e-5));
        checks.push(Check::below("φ₂^A fit", e[2], 1e-5));
    }
    let mu = data.mass_aspect(n, test_aspect(d))?;
    let (lhs, rhs) = aspect_integral_identity(&data, &mu, n)?;
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    checks.push(Check::below("aspect integral identity", (lhs - rhs).abs() / scale, 1e-8));
    let mut res = json!({
        "n": n,
        "resolution": c.resolution,
        "shooting": {
            "x": rep.x, "r": rep.r,
            "xbar_remainder": rep.xbar_remainder, "rbar_remainder": rep.rbar_remainder,
            "xbar_order": rep.xbar_order, "rbar_order": rep.rbar_order,
            "coefficient_errors": rep.coefficient_errors,
        },
        "identity": { "lhs": lhs, "rhs": rhs },
        "obstruction": obstruction_residual(&data, n)?,
    });
    let kb = kbar(&data, n)?;
    res["kbar"] = json!({ "mean": kb.mean, "spread": kb.spread, "constant": kb.constant });
    if n == 3 {
        let bar = transform_mass_aspect(&data, &mu, 3)?;
        let mut worst = 0.0f64;
        for ((x, m), mb) in data.nodes().iter().zip(&mu.mu).zip(&bar.mu) {
            let psi = 1.0 / data.phi.value(x)?;
            worst = worst.max((mb - m * psi).amax());
        }
        checks.push(Check::below("μ̄ = ψμ", worst, 1e-12));
        res["aspect_law_defect"] = json!(worst);
    } else {
        let defect = mass_aspect_trace_defect(&data, &mu)?;
        checks.push(Check::below("n = 4 trace", defect, 1e-8));
        res["trace_defect"] = json!(defect);
    }
    let rows = rep
        .x
        .iter()
        .enumerate()
        .map(|(j, x)| vec![*x, rep.r[j], rep.xbar_remainder[j], rep.rbar_remainder[j]])
        .collect();
    let table = Table {
        kind: "gauge-remainders",
        header: ["x", "r", "xbar_remainder", "rbar_remainder"].iter().map(|s| s.to_string()).collect(),
        rows,
    };
    Ok(ResultBundle::new(cfg, obj(res), checks, vec![table]))
}

fn run_verify_all(cfg: &RunConfig) -> Out {
    let opts = verify::SuiteOptions { quick: cfg.verify.quick, seed: cfg.seed, only: cfg.verify.only.clone() };
    let start = std::time::Instant::now();
    let outcomes = verify::run_suite(&opts);
    let total = start.elapsed().as_secs_f64();
    let checks = outcomes.iter().map(|o| Check::new(format!("criterion {}: {}", o.id, o.name), o.pass, o.summary())).collect();
    let res = json!({ "quick": opts.quick, "criteria": outcomes });
    let mut b = ResultBundle::new(cfg, obj(res), checks, Vec::new());
    // wall time is reported on stderr only, so the JSON stays reproducible
    eprintln!("verify-all finished in {total:.1} s");
    b.pass = b.checks.iter().all(|c| c.pass);
    Ok(b)
}
