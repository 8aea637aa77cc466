//! Command-line flags, the TOML run configuration and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nevkit", version, about = "Growth characteristics and integral bounds for circle maxima")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandArgs>,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its entries.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed of the random suite.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Number of random cases.
    #[arg(long, global = true, value_name = "N")]
    pub cases: Option<usize>,
    /// Quadrature tolerance.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Omit the `# generated` header line.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Table of M_U, C_U, C_{U+}, the radial counting function and windowed characteristics.
    Characteristics {
        /// Model file (JSON, or TOML by extension).
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        /// Comma-separated radii.
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        radii: Vec<f64>,
        /// Comma-separated windows `r:R`; defaults to the smallest radius against each larger one.
        #[arg(long, value_delimiter = ',', value_parser = parse_window, value_name = "LIST")]
        windows: Vec<[f64; 2]>,
    },
    /// Runs the seeded suite for the integral bound, the fixture, or one case from files.
    Verify {
        /// Only the fixture `ln(5/|z-1|)` with `m(t) = t` on `[0, 2]`, `R = 4`.
        #[arg(long)]
        fixture: bool,
        /// Model file of a single case.
        #[arg(long, value_name = "PATH", requires_all = ["integrator", "window"])]
        model: Option<PathBuf>,
        /// Integrator file of a single case.
        #[arg(long, value_name = "PATH", requires = "model")]
        integrator: Option<PathBuf>,
        /// Window `r:R` of a single case.
        #[arg(long, value_parser = parse_window, value_name = "r:R", requires = "model")]
        window: Option<[f64; 2]>,
    },
    /// Scans the smoothed-jump family; `0` stands for the jump itself.
    Counterexample {
        /// Comma-separated ε values; defaults to 1e-1, ..., 1e-6.
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        eps: Vec<f64>,
    },
    /// Checks the classical form of the bound for a rational function.
    Classical {
        /// Rational-function file.
        #[arg(long, value_name = "PATH")]
        rational: Option<PathBuf>,
        /// Inner radius, at least 1.
        #[arg(long)]
        r: Option<f64>,
        /// Ratio R/r, greater than 1.
        #[arg(long)]
        k: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Characteristics,
    Verify,
    Counterexample,
    Classical,
}

/// Contents of a `--config` file. Relative paths are resolved against the
/// file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<CommandKind>,
    pub model: Option<PathBuf>,
    pub integrator: Option<PathBuf>,
    pub rational: Option<PathBuf>,
    pub window: Option<[f64; 2]>,
    pub radii: Option<Vec<f64>>,
    pub windows: Option<Vec<[f64; 2]>>,
    pub epsilons: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub cases: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub no_timestamp: Option<bool>,
    pub fixture: Option<bool>,
    pub r: Option<f64>,
    pub k: Option<f64>,
}

/// Fully merged run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: Option<PathBuf>,
    pub integrator: Option<PathBuf>,
    pub rational: Option<PathBuf>,
    pub window: Option<[f64; 2]>,
    pub radii: Vec<f64>,
    pub windows: Vec<[f64; 2]>,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    pub cases: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
    pub fixture: bool,
    pub r: f64,
    pub k: f64,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CASES: usize = 200;
pub const DEFAULT_CLASSICAL_R: f64 = 2.0;
pub const DEFAULT_CLASSICAL_K: f64 = 2.0;

fn parse_window(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("window `{s}` must look like r:R"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("window `{s}`: {e}"));
    Ok([num(a)?, num(b)?])
}

fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg: FileConfig = toml::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    for p in [&mut cfg.model, &mut cfg.integrator, &mut cfg.rational, &mut cfg.out] {
        if let Some(p) = p.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(cfg)
}

impl RunConfig {
    /// Merges flags over the config file and checks the invariants.
    pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
        let file = match &cli.common.config {
            Some(path) => load_file_config(path)?,
            None => FileConfig::default(),
        };
        let common = cli.common;
        let command = match &cli.command {
            Some(CommandArgs::Characteristics { .. }) => CommandKind::Characteristics,
            Some(CommandArgs::Verify { .. }) => CommandKind::Verify,
            Some(CommandArgs::Counterexample { .. }) => CommandKind::Counterexample,
            Some(CommandArgs::Classical { .. }) => CommandKind::Classical,
            None => file
                .command
                .ok_or_else(|| CliError::Parse("no command given on the command line or in the config".into()))?,
        };
        let mut cfg = RunConfig {
            command,
            model: file.model,
            integrator: file.integrator,
            rational: file.rational,
            window: file.window,
            radii: file.radii.unwrap_or_default(),
            windows: file.windows.unwrap_or_default(),
            epsilons: file.epsilons.unwrap_or_default(),
            seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            cases: common.cases.or(file.cases).unwrap_or(DEFAULT_CASES),
            tol: common.tol.or(file.tol).unwrap_or(nevkit::bounds::DEFAULT_TOL),
            out: common.out.or(file.out),
            timestamp: !(common.no_timestamp || file.no_timestamp.unwrap_or(false)),
            fixture: file.fixture.unwrap_or(false),
            r: file.r.unwrap_or(DEFAULT_CLASSICAL_R),
            k: file.k.unwrap_or(DEFAULT_CLASSICAL_K),
        };
        match cli.command {
            Some(CommandArgs::Characteristics { model, radii, windows }) => {
                cfg.model = model.or(cfg.model);
                if !radii.is_empty() {
                    cfg.radii = radii;
                }
                if !windows.is_empty() {
                    cfg.windows = windows;
                }
            }
            Some(CommandArgs::Verify {
                fixture,
                model,
                integrator,
                window,
            }) => {
                cfg.fixture |= fixture;
                if model.is_some() {
                    cfg.model = model;
                    cfg.integrator = integrator;
                    cfg.window = window;
                }
            }
            Some(CommandArgs::Counterexample { eps }) => {
                if !eps.is_empty() {
                    cfg.epsilons = eps;
                }
            }
            Some(CommandArgs::Classical { rational, r, k }) => {
                cfg.rational = rational.or(cfg.rational);
                cfg.r = r.unwrap_or(cfg.r);
                cfg.k = k.unwrap_or(cfg.k);
            }
            None => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let invalid = |msg: String| Err(CliError::Parse(msg));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return invalid(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.cases < 1 {
            return invalid("case count must be at least 1".into());
        }
        for p in [&self.model, &self.integrator, &self.rational].into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::Io(format!("{}: file not found", p.display())));
            }
        }
        match self.command {
            CommandKind::Characteristics => {
                if self.model.is_none() {
                    return invalid("characteristics needs a model file".into());
                }
                if self.radii.is_empty() {
                    return invalid("characteristics needs at least one radius".into());
                }
                if let Some(t) = self.radii.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                    return invalid(format!("radius {t} must be positive and finite"));
                }
                if let Some(w) = self.windows.iter().find(|w| !(0.0 < w[0] && w[0] < w[1] && w[1].is_finite())) {
                    return invalid(format!("window {}:{} must satisfy 0 < r < R", w[0], w[1]));
                }
            }
            CommandKind::Verify => {
                let files = [self.model.is_some(), self.integrator.is_some(), self.window.is_some()];
                if files.iter().any(|&b| b) && !files.iter().all(|&b| b) {
                    return invalid("a single verify case needs model, integrator and window together".into());
                }
            }
            CommandKind::Counterexample => {
                if let Some(e) = self.epsilons.iter().find(|e| !(**e >= 0.0 && **e <= 1.0)) {
                    return invalid(format!("epsilon {e} must lie in [0, 1]"));
                }
            }
            CommandKind::Classical => {
                if self.rational.is_none() {
                    return invalid("classical needs a rational-function file".into());
                }
            }
        }
        Ok(())
    }
}
