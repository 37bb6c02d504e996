use alh_cli::bundle::{format_float, read_table};
use alh_cli::config::{Command as Cmd, FamilyKind};
use alh_cli::{emit_plotdata, exit, run, CliError, RunConfig};
use alh_core::AlhError;
use proptest::prelude::*;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn alh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alh")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("alh-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn mass_of_horowitz_myers() {
    let out = alh(&["mass", "--family", "hm", "--n", "3", "--mc", "1"]);
    assert_eq!(out.status.code(), Some(exit::PASS));
    let v = json(&out);
    assert_eq!(v["schema"], "alh-result/1");
    assert_eq!(v["command"], "mass");
    assert!((v["mass"].as_f64().unwrap() + 2.0).abs() < 1e-5);
    assert_eq!(v["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn yamabe_writes_a_round_tripping_profile() {
    let dir = scratch("yamabe");
    let out = alh(&["yamabe", "--i", "16", "--grid", "64", "--csv-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(exit::PASS), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let gb = v["gauss_bonnet"].as_f64().unwrap();
    assert!((gb - 2.0 * std::f64::consts::PI).abs() < 0.005 * 2.0 * std::f64::consts::PI);

    // the library run reproduces the same table bit for bit
    let mut cfg = RunConfig::new(Cmd::Yamabe);
    cfg.grid.i = 16.0;
    cfg.grid.n = 64;
    let b = run(&cfg).unwrap();
    let t = b.table("omega-profile").unwrap();
    let (header, rows) = read_table(&dir.join("omega-profile.csv")).unwrap();
    assert_eq!(header, t.header);
    assert_eq!(rows.len(), t.rows.len());
    for (a, b) in rows.iter().zip(&t.rows) {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn unknown_keys_name_their_path() {
    let dir = scratch("badkey");
    let path = dir.join("run.toml");
    std::fs::write(&path, "command = \"mass\"\n[family]\nkind = \"hm\"\nbogus = 1\n").unwrap();
    let out = alh(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(exit::CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("family.bogus"));
}

#[test]
fn out_of_range_values_are_config_errors() {
    let out = alh(&["yamabe", "--i", "0.5"]);
    assert_eq!(out.status.code(), Some(exit::CONFIG));
    let out = alh(&["conformal", "--n", "5"]);
    assert_eq!(out.status.code(), Some(exit::CONFIG));
}

#[test]
fn runs_are_deterministic_up_to_the_timestamp() {
    let strip = |out: &Output| {
        let mut v = json(out);
        v["provenance"].as_object_mut().unwrap().remove("timestamp");
        v
    };
    let args = ["kid-check", "--family", "bk", "--n", "4", "--k", "-1", "--draws", "10", "--seed", "5"];
    let (a, b) = (alh(&args), alh(&args));
    assert_eq!(a.status.code(), Some(exit::PASS));
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn provenance_reproduces_the_config() {
    let mut cfg = RunConfig::new(Cmd::Mass);
    cfg.family.kind = FamilyKind::Bk;
    cfg.family.k = -1;
    cfg.family.m_c = 0.7;
    let b = run(&cfg).unwrap();
    assert_eq!(RunConfig::from_toml(&b.provenance.config).unwrap(), cfg);
    assert!(b.pass, "{:?}", b.checks);
}

#[test]
fn mass_ladder_radii_increase() {
    let b = run(&RunConfig::new(Cmd::Mass)).unwrap();
    let t = b.table("mass-ladder").unwrap();
    assert_eq!(t.header[0], "R");
    assert!(t.rows.windows(2).all(|w| w[1][0] > w[0][0]));
}

#[test]
fn bracket_curve_has_one_row_per_sample() {
    let mut cfg = RunConfig::new(Cmd::GlueMass);
    cfg.grid.limit = false;
    let b = run(&cfg).unwrap();
    let t = b.table("bracket-curve").unwrap();
    assert_eq!(t.rows.len(), 256);
    assert!(t.rows.iter().all(|r| r[1] < r[2]));
}

#[test]
fn missing_plot_data_is_reported() {
    let b = run(&RunConfig::new(Cmd::Mass)).unwrap();
    let dir = scratch("missing");
    match emit_plotdata(&b, &["mass-ladder", "omega-profile", "nope"], &dir) {
        Err(CliError::MissingData(s)) => assert_eq!(s, "omega-profile, nope"),
        other => panic!("{other:?}"),
    }
    assert!(!dir.join("mass-ladder.csv").exists());
}

#[test]
fn exit_codes() {
    assert_eq!(CliError::Config("x".into()).exit_code(), exit::CONFIG);
    assert_eq!(CliError::MissingData("x".into()).exit_code(), exit::CONFIG);
    assert_eq!(CliError::Core(AlhError::Domain("x".into())).exit_code(), exit::CONFIG);
    assert_eq!(CliError::Core(AlhError::Integration("x".into())).exit_code(), exit::SOLVER);
}

#[test]
fn quick_verification_passes() {
    let out = alh(&["verify-all", "--quick"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(exit::PASS), "{err}");
    assert_eq!(err.lines().filter(|l| l.starts_with("[PASS]")).count(), 9, "{err}");
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        prop::sample::select(vec![Cmd::Mass, Cmd::Yamabe, Cmd::Conformal, Cmd::GlueGenus]),
        any::<u64>(),
        1usize..200,
        prop::sample::select(vec![FamilyKind::Bk, FamilyKind::Hm, FamilyKind::BkZero, FamilyKind::N2]),
        3usize..=5,
        -1i32..=1,
        0.0..10.0f64,
        (8usize..100).prop_map(|h| 2 * h),
        1.5..1e6f64,
        prop::option::of(prop::collection::vec(-5.0..5.0f64, 3)),
    )
        .prop_map(|(command, seed, draws, kind, n, k, m_c, grid, i, point)| {
            let mut c = RunConfig::new(command);
            c.seed = seed;
            c.draws = draws;
            c.family.kind = kind;
            c.family.n = n;
            c.family.k = k;
            c.family.m_c = m_c;
            c.family.point = point;
            c.grid.n = grid;
            c.grid.i = i;
            c
        })
}

proptest! {
    #[test]
    fn config_toml_round_trips(cfg in config_strategy()) {
        prop_assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn csv_floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
