//! Run configuration: one TOML file per run, validated before dispatch.

use crate::CliError;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Curvature,
    KidCheck,
    Mass,
    Yamabe,
    GlueMass,
    GlueGenus,
    Conformal,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::KidCheck => "kid-check",
            Command::Mass => "mass",
            Command::Yamabe => "yamabe",
            Command::GlueMass => "glue mass",
            Command::GlueGenus => "glue genus",
            Command::Conformal => "conformal",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Birmingham-Kottler.
    Bk,
    /// Horowitz-Myers.
    Hm,
    /// Static potentials of the m_c = 0 Kottler background.
    BkZero,
    /// The two-dimensional potential family.
    N2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    /// Space dimension.
    pub n: usize,
    /// Boundary curvature sign for BK.
    pub k: i32,
    pub m_c: f64,
    /// Use the (n+1)-dimensional static spacetime instead of the slice.
    pub spacetime: bool,
    /// Chart point for `curvature`; a default point is chosen when absent.
    pub point: Option<Vec<f64>>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { kind: FamilyKind::Hm, n: 3, k: 0, m_c: 1.0, spacetime: false, point: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Cartesian nodes per side of the Yamabe grid.
    pub n: usize,
    /// Neck parameter.
    pub i: f64,
    pub punctures: usize,
    /// Solve on the mirror-doubled surface instead of with Neumann data.
    pub doubled: bool,
    /// Radius ladder for the mass evaluators.
    pub ladder: Vec<f64>,
    /// Solve the i → ∞ limit profile in `glue mass`.
    pub limit: bool,
    /// Neck count for `glue genus`.
    pub necks: usize,
    /// Samples of the bracket curve.
    pub bracket_samples: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 128,
            i: 64.0,
            punctures: 1,
            doubled: false,
            ladder: alh_core::mass::DEFAULT_LADDER.to_vec(),
            limit: false,
            necks: 1,
            bracket_samples: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConformalConfig {
    /// Bulk dimension, 3 or 4.
    pub n: usize,
    /// Torus nodes per side.
    pub resolution: usize,
    pub modes: usize,
    pub max_freq: i32,
    pub amplitude: f64,
    /// Number of shooting rays.
    pub rays: usize,
}

impl Default for ConformalConfig {
    fn default() -> Self {
        ConformalConfig { n: 3, resolution: 32, modes: 3, max_freq: 2, amplitude: 0.15, rays: 6 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub quick: bool,
    /// Criteria to run; all when empty.
    pub only: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// JSON destination; stdout when absent.
    pub json: Option<String>,
    /// Directory for plot-data CSV files.
    pub csv_dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random draws for property checks.
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub conformal: ConformalConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

pub const DEFAULT_SEED: u64 = 20211116;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_draws() -> usize {
    50
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            seed: DEFAULT_SEED,
            draws: default_draws(),
            family: FamilyConfig::default(),
            grid: GridConfig::default(),
            conformal: ConformalConfig::default(),
            verify: VerifyConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses TOML, reporting the key path of the first offending entry.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("at `{key}`: {msg}")));
        let f = &self.family;
        if f.n < 2 || f.n > 6 {
            return bad("family.n", format!("space dimension {} outside 2..=6", f.n));
        }
        if !(-1..=1).contains(&f.k) {
            return bad("family.k", format!("{} is not in {{-1, 0, 1}}", f.k));
        }
        if !f.m_c.is_finite() {
            return bad("family.m_c", "must be finite".into());
        }
        if let Some(p) = &f.point {
            if p.iter().any(|v| !v.is_finite()) {
                return bad("family.point", "entries must be finite".into());
            }
        }
        let g = &self.grid;
        if g.n < 16 || g.n % 2 != 0 {
            return bad("grid.n", format!("{} must be even and at least 16", g.n));
        }
        if !(g.i > 1.0) {
            return bad("grid.i", format!("{} must exceed 1", g.i));
        }
        if !(1..=4).contains(&g.punctures) {
            return bad("grid.punctures", format!("{} outside 1..=4", g.punctures));
        }
        if g.ladder.len() < 3 || g.ladder.windows(2).any(|w| !(w[1] > w[0])) || g.ladder[0] <= 0.0 {
            return bad("grid.ladder", "need at least three increasing positive radii".into());
        }
        if g.necks == 0 {
            return bad("grid.necks", "at least one neck".into());
        }
        if g.bracket_samples < 2 {
            return bad("grid.bracket_samples", "at least two samples".into());
        }
        let c = &self.conformal;
        if c.n != 3 && c.n != 4 {
            return bad("conformal.n", format!("{} is not 3 or 4", c.n));
        }
        if c.resolution < 4 || c.resolution % 2 != 0 {
            return bad("conformal.resolution", format!("{} must be even and at least 4", c.resolution));
        }
        if c.modes == 0 || c.max_freq < 1 || !(c.amplitude.is_finite() && c.amplitude >= 0.0) || c.rays == 0 {
            return bad("conformal", "modes, max_freq and rays must be positive, amplitude non-negative".into());
        }
        if let Some(k) = self.verify.only.iter().find(|k| !(1..=9).contains(*k)) {
            return bad("verify.only", format!("no criterion {k}"));
        }
        if self.draws == 0 {
            return bad("draws", "must be positive".into());
        }
        Ok(())
    }
}
