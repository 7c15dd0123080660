//! Command-line surface: spectra, sweeps, verification suites, ABC queries
//! and geometry checks.

pub mod config;
pub mod flows;
pub mod output;
pub mod spectra;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::operator::{OperatorError, SchemeRegistry};
use crate::sim::SimError;
use config::{ConfigError, RunConfig};
use output::{Format, Meta, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("numeric domain error: {0}")]
    Domain(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

impl From<OperatorError> for CliError {
    fn from(e: OperatorError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Domain(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dynamo", version, about = "Filamentary dynamo spectra and ABC flow tools")]
pub struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_parser = ["eq13_14", "eq18", "eq24", "exact"])]
    pub scheme: Option<String>,
    /// Override a config key, e.g. `--set plasma.beta=0.1`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Spectrum and classification at a single parameter point.
    Spectrum,
    /// Spectra over a parameter grid.
    Sweep,
    /// Run the verification suites.
    Verify,
    /// ABC flow queries.
    Abc {
        #[command(subcommand)]
        action: AbcAction,
    },
    /// Finite-difference checks of the helix Frenet frame.
    FrenetCheck,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum AbcAction {
    /// Field at points in both forms.
    Eval,
    /// Toroidal and radial velocity over a tube grid.
    Tube,
    /// Stagnation classification.
    Stagnation,
    /// Marginal / slow growth classification.
    Growth,
}

impl Command {
    fn label(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Abc { action } => match action {
                AbcAction::Eval => "abc eval",
                AbcAction::Tube => "abc tube",
                AbcAction::Stagnation => "abc stagnation",
                AbcAction::Growth => "abc growth",
            },
            Command::FrenetCheck => "frenet-check",
        }
    }
}

/// Rendered report plus whether every check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Vec<u8>,
    pub passed: bool,
    pub path: Option<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        }
    }
}

/// Keys that do not change results and are left out of the config echo.
const NON_SEMANTIC: [&str; 3] = ["output.format", "output.path", "run.threads"];

pub fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for assignment in &cli.overrides {
        cfg.set(assignment)?;
    }
    if let Some(scheme) = &cli.scheme {
        cfg.set(&format!("scheme={scheme}"))?;
    }
    if let Some(seed) = cli.seed {
        cfg.set(&format!("run.seed={seed}"))?;
    }
    Ok(cfg)
}

/// Runs a parsed command and renders its report without writing it.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = load_config(cli)?;
    let format = match (cli.format, cfg.str("output.format")) {
        (Some(f), _) => f,
        (None, Some(raw)) => Format::parse(raw)
            .ok_or_else(|| cfg.error("output.format", format!("unknown format '{raw}' (expected csv or json)")))?,
        (None, None) => Format::Csv,
    };
    let path = cli.out.clone().or_else(|| cfg.str("output.path").map(PathBuf::from));
    let threads = match cli.threads {
        Some(n) => Some(n as u64),
        None => cfg.u64("run.threads")?,
    };
    let seed = cfg.u64("run.seed")?.unwrap_or(verify::DEFAULT_SEED);

    let registry = SchemeRegistry::with_defaults();
    let scheme_name = cfg.str("scheme").unwrap_or("eq18");
    let scheme = registry
        .get(scheme_name)
        .map_err(|e| cfg.error("scheme", e.to_string()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0) as usize)
        .build()
        .map_err(|e| cfg.error("run.threads", e.to_string()))?;

    let (table, passed): (Table, bool) = pool.install(|| -> Result<_, CliError> {
        Ok(match cli.command {
            Command::Spectrum => (spectra::cmd_spectrum(&cfg, scheme.clone())?, true),
            Command::Sweep => (spectra::cmd_sweep(&cfg, scheme.clone())?, true),
            Command::Verify => verify::cmd_verify(&cfg, seed)?,
            Command::FrenetCheck => verify::cmd_frenet_check(&cfg, seed)?,
            Command::Abc { action } => (
                match action {
                    AbcAction::Eval => flows::cmd_eval(&cfg)?,
                    AbcAction::Tube => flows::cmd_tube(&cfg)?,
                    AbcAction::Stagnation => flows::cmd_stagnation(&cfg)?,
                    AbcAction::Growth => flows::cmd_growth(&cfg)?,
                },
                true,
            ),
        })
    })?;

    let mut echo = cfg.echo();
    echo.retain(|k, _| !NON_SEMANTIC.contains(&k.as_str()));
    let meta = Meta {
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.label().to_string(),
        seed: Some(seed),
        scheme: scheme.name().to_string(),
        config: echo,
    };
    Ok(Outcome {
        report: output::render(&table, &meta, format)?,
        passed,
        path,
    })
}

/// Parses arguments, runs, writes the report, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = execute(&cli).and_then(|o| {
        match &o.path {
            Some(path) => std::fs::write(path, &o.report)?,
            None => std::io::stdout().lock().write_all(&o.report)?,
        }
        Ok(o)
    });
    match outcome {
        Ok(o) => {
            if !o.passed {
                eprintln!("dynamo: verification failed");
            }
            o.exit_code()
        }
        Err(e) => {
            eprintln!("dynamo: {e}");
            e.exit_code()
        }
    }
}
