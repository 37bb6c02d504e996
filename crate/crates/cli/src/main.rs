use alh_cli::bundle::emit_plotdata;
use alh_cli::config::{Command, FamilyKind, RunConfig};
use alh_cli::{exit, init_threads, run, CliError, ResultBundle};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "alh", version, about = "Mass, curvature and Yamabe-neck numerics for ALH metrics")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Directory for plot-data CSV files.
    #[arg(long, global = true)]
    csv_dir: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run from a TOML configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Curvature at a chart point, with the Einstein residual for spacetimes.
    Curvature {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        spacetime: bool,
        /// Comma-separated chart coordinates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        point: Option<Vec<f64>>,
    },
    /// Static KID residuals of random members of a potential family.
    KidCheck {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 50)]
        draws: usize,
    },
    /// The four mass evaluators, extrapolated along a radius ladder.
    Mass {
        #[command(flatten)]
        family: FamilyArgs,
        /// Comma-separated radii.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
    },
    /// Solve the neck problem on the punctured unit torus.
    Yamabe {
        #[arg(long, default_value_t = 64.0)]
        i: f64,
        #[arg(long, default_value_t = 1)]
        punctures: usize,
        /// Cartesian nodes per side.
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long)]
        doubled: bool,
    },
    /// Glued-mass estimates.
    Glue {
        #[command(subcommand)]
        what: GlueCmd,
    },
    /// Conformal rescaling of a random boundary factor on a flat torus.
    Conformal {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        #[arg(long, default_value_t = 0.15)]
        amplitude: f64,
        #[arg(long, default_value_t = 3)]
        modes: usize,
        #[arg(long, default_value_t = 6)]
        rays: usize,
    },
    /// Run the verification suite.
    VerifyAll {
        /// Coarser grids for the Yamabe criteria.
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
    },
}

#[derive(Subcommand)]
enum GlueCmd {
    /// Bracket and i → ∞ limit of the glued Horowitz-Myers mass.
    Mass {
        #[arg(long = "mc", default_value_t = 1.0)]
        m_c: f64,
        /// Skip the limit-profile solve.
        #[arg(long)]
        no_limit: bool,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Genus and area of the doubled surface, with the solver area check.
    Genus {
        #[arg(long, default_value_t = 1)]
        necks: usize,
        #[arg(long, default_value_t = 64.0)]
        i: f64,
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Bk,
    Hm,
    BkZero,
    N2,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "hm")]
    family: FamilyArg,
    /// Space dimension.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    k: i32,
    #[arg(long = "mc", default_value_t = 1.0, allow_negative_numbers = true)]
    m_c: f64,
}

impl FamilyArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.family.kind = match self.family {
            FamilyArg::Bk => FamilyKind::Bk,
            FamilyArg::Hm => FamilyKind::Hm,
            FamilyArg::BkZero => FamilyKind::BkZero,
            FamilyArg::N2 => FamilyKind::N2,
        };
        cfg.family.n = self.n;
        cfg.family.k = self.k;
        cfg.family.m_c = self.m_c;
    }
}

fn config_from_cli(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.cmd {
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(config).map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            RunConfig::from_toml(&text)?
        }
        Cmd::Curvature { family, spacetime, point } => {
            let mut c = RunConfig::new(Command::Curvature);
            family.apply(&mut c);
            c.family.spacetime = *spacetime;
            c.family.point = point.clone();
            c
        }
        Cmd::KidCheck { family, draws } => {
            let mut c = RunConfig::new(Command::KidCheck);
            family.apply(&mut c);
            c.draws = *draws;
            c
        }
        Cmd::Mass { family, ladder } => {
            let mut c = RunConfig::new(Command::Mass);
            family.apply(&mut c);
            if let Some(l) = ladder {
                c.grid.ladder = l.clone();
            }
            c
        }
        Cmd::Yamabe { i, punctures, grid, doubled } => {
            let mut c = RunConfig::new(Command::Yamabe);
            c.grid.i = *i;
            c.grid.punctures = *punctures;
            c.grid.n = *grid;
            c.grid.doubled = *doubled;
            c
        }
        Cmd::Glue { what: GlueCmd::Mass { m_c, no_limit, grid, samples } } => {
            let mut c = RunConfig::new(Command::GlueMass);
            c.family.m_c = *m_c;
            c.grid.limit = !no_limit;
            c.grid.n = *grid;
            c.grid.bracket_samples = *samples;
            c
        }
        Cmd::Glue { what: GlueCmd::Genus { necks, i, grid } } => {
            let mut c = RunConfig::new(Command::GlueGenus);
            c.grid.necks = *necks;
            c.grid.i = *i;
            c.grid.n = *grid;
            c
        }
        Cmd::Conformal { n, resolution, amplitude, modes, rays } => {
            let mut c = RunConfig::new(Command::Conformal);
            c.conformal.n = *n;
            c.conformal.resolution = *resolution;
            c.conformal.amplitude = *amplitude;
            c.conformal.modes = *modes;
            c.conformal.rays = *rays;
            c
        }
        Cmd::VerifyAll { quick, only } => {
            let mut c = RunConfig::new(Command::VerifyAll);
            c.verify.quick = *quick;
            c.verify.only = only.clone().unwrap_or_default();
            c
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = &cli.json {
        cfg.output.json = Some(p.display().to_string());
    }
    if let Some(p) = &cli.csv_dir {
        cfg.output.csv_dir = Some(p.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(cfg: &RunConfig, b: &ResultBundle) -> Result<(), CliError> {
    let json = b.to_json();
    match &cfg.output.json {
        Some(p) => std::fs::write(p, json).map_err(|e| CliError::Io(format!("{p}: {e}")))?,
        None => print!("{json}"),
    }
    if let Some(dir) = &cfg.output.csv_dir {
        let kinds: Vec<&str> = b.tables.iter().map(|t| t.kind).collect();
        for p in emit_plotdata(b, &kinds, Path::new(dir))? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| config_from_cli(&cli)).and_then(|cfg| {
        let b = run(&cfg)?;
        write_outputs(&cfg, &b)?;
        Ok(b)
    });
    let code = match result {
        Ok(b) => {
            for c in b.checks.iter().filter(|c| !c.pass) {
                eprintln!("check failed: {} ({})", c.name, c.detail);
            }
            if b.pass {
                exit::PASS
            } else {
                exit::CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
