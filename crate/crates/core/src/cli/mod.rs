//! Configuration-driven runner behind the `sqzmirror` binary.

pub mod config;
pub mod output;
pub mod scenario;

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::Error;

pub use config::{resolve, ConfigFile, Model, Overrides, PhaseArg, RunConfig, Scenario};
pub use output::Table;
pub use scenario::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Numeric => 3,
            ErrorKind::Internal => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }

    /// Classifies a library error raised while evaluating `point`.
    pub fn from_core(e: Error, point: &str) -> Self {
        let kind = match &e {
            Error::Parameter { .. } | Error::Grid(_) | Error::StepTooCoarse { .. } => ErrorKind::Config,
            Error::Dimension(_)
            | Error::UnsupportedModes { .. }
            | Error::NonSelfAdjoint(_)
            | Error::UnsupportedGenerator(_) => ErrorKind::Internal,
            _ => ErrorKind::Numeric,
        };
        Self {
            kind,
            message: format!("{point}: {e}"),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Resolves a run from an optional config file, overrides and the environment.
pub fn load(scenario: Scenario, config: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let file = config.map(ConfigFile::load).transpose()?;
    let env = std::env::var(config::OUTPUT_DIR_ENV).ok();
    resolve(scenario, file.as_ref(), overrides, env.as_deref())
}

/// Evaluates a run without touching the file system.
pub fn compute(cfg: &RunConfig, jobs: Option<usize>) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::config("--jobs must be positive"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::internal(format!("thread pool: {e}")))?;
    scenario::execute(cfg, &pool)
}

pub fn manifest_name(cfg: &RunConfig) -> String {
    format!("{}_manifest.toml", cfg.scenario.name())
}

/// Computes the run, writes its CSV files and manifest, and returns the paths written.
///
/// Files are written even when some points fail; the error then lists every failed point.
pub fn run(cfg: &RunConfig, jobs: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let outcome = compute(cfg, jobs)?;
    let io = |e: std::io::Error| CliError::internal(format!("writing to {}: {e}", cfg.output_dir.display()));
    let mut paths = output::write_tables(&cfg.output_dir, &outcome.tables).map_err(io)?;
    let manifest = cfg.output_dir.join(manifest_name(cfg));
    std::fs::write(&manifest, cfg.manifest()).map_err(io)?;
    paths.push(manifest);
    match outcome.failures.first() {
        None => Ok(paths),
        Some(first) => {
            let lines: Vec<String> = outcome.failures.iter().map(|f| format!("  {f}")).collect();
            Err(CliError {
                kind: first.kind,
                message: format!(
                    "{} point(s) failed; partial results written to {}\n{}",
                    outcome.failures.len(),
                    cfg.output_dir.display(),
                    lines.join("\n")
                ),
            })
        }
    }
}
