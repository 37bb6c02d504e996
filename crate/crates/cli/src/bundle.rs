//! Result bundles: JSON summary, CSV tables and provenance.

use crate::config::RunConfig;
use crate::CliError;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "alh-result/1";

/// One pass/fail comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }

    /// `value` within `tol` of `target`.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let pass = (value - target).abs() <= tol;
        Check::new(name, pass, format!("{value} vs {target} ± {tol:e}"))
    }

    /// `value` at most `bound`.
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::new(name, value <= bound, format!("{value:e} <= {bound:e}"))
    }
}

/// Tabular plot data with a fixed column order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub kind: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config_sha256: String,
    /// The effective configuration as TOML; re-parses to the same config.
    pub config: String,
    /// Seconds since the Unix epoch; the only non-deterministic field.
    pub timestamp: u64,
}

impl Provenance {
    pub fn for_config(cfg: &RunConfig) -> Self {
        let config = cfg.to_toml();
        let digest = Sha256::digest(config.as_bytes());
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Provenance { version: env!("CARGO_PKG_VERSION").to_string(), config_sha256, config, timestamp }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultBundle {
    pub schema: &'static str,
    pub command: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(flatten)]
    pub results: Map<String, Value>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    pub provenance: Provenance,
}

impl ResultBundle {
    pub fn new(cfg: &RunConfig, results: Map<String, Value>, checks: Vec<Check>, tables: Vec<Table>) -> Self {
        ResultBundle {
            schema: SCHEMA,
            command: cfg.command.name().to_string(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            results,
            tables,
            provenance: Provenance::for_config(cfg),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    /// JSON with the timestamp zeroed, for reproducibility comparisons.
    pub fn to_json_without_timestamp(&self) -> String {
        let mut b = self.clone();
        b.provenance.timestamp = 0;
        b.to_json()
    }

    pub fn table(&self, kind: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.kind == kind)
    }
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes one CSV per requested kind into `dir`. Kinds the bundle lacks are
/// collected and reported together.
pub fn emit_plotdata(bundle: &ResultBundle, kinds: &[&str], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let missing: Vec<&str> = kinds.iter().copied().filter(|k| bundle.table(k).is_none()).collect();
    if !missing.is_empty() {
        return Err(CliError::MissingData(missing.join(", ")));
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for kind in kinds {
        let t = bundle.table(kind).expect("checked above");
        let path = dir.join(format!("{kind}.csv"));
        write_table(t, &path)?;
        out.push(path);
    }
    Ok(out)
}

pub fn write_table(t: &Table, path: &Path) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(&t.header).map_err(io)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|v| format_float(*v))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reads a table written by [`write_table`].
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let header = r.headers().map_err(io)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io)?;
        let row: Result<Vec<f64>, _> = rec.iter().map(|s| s.parse::<f64>()).collect();
        rows.push(row.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
    }
    Ok((header, rows))
}
