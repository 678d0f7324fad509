//! Experiment runner for `ilt-core`: parses a flat config, runs one named
//! experiment, writes CSV tables and reports pass/fail checks.
//!
//! Exit codes: 0 all checks pass, 1 a check fails (or a runtime error),
//! 2 bad usage or config, 3 step budget exceeded.

use std::path::{Path, PathBuf};

use ilt_core::diffusion::DiffusionError;
use ilt_core::green::GreenError;
use ilt_core::specfun::SpecfunError;
use ilt_core::subordinator::SubordinatorError;
use ilt_core::trace::TraceError;
use thiserror::Error;

pub mod config;
mod experiments;
pub mod output;

pub use config::{Experiment, ExperimentConfig, GaugeMode, MassSpec};
pub use ilt_core::rng::derive_substream;
pub use output::{Cell, Table};

/// Default cap on the total number of simulation steps of one run.
pub const DEFAULT_STEP_BUDGET: f64 = 5e10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("expected {expected:.3e} steps exceed the budget {budget:.3e}")]
    Budget { expected: f64, budget: f64 },
    #[error("parallel execution failed: {0}")]
    Exec(String),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Subordinator(#[from] SubordinatorError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Green(#[from] GreenError),
}

impl From<ilt_core::rng::ExecError> for CliError {
    fn from(e: ilt_core::rng::ExecError) -> Self {
        Self::Exec(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use DiffusionError as D;
        use GreenError as G;
        use SubordinatorError as S;
        match self {
            Self::Config(_) => 2,
            Self::Budget { .. } => 3,
            Self::Io { .. } | Self::Exec(_) => 1,
            Self::Specfun(SpecfunError::Domain { .. } | SpecfunError::Order(_)) => 2,
            Self::Specfun(_) => 1,
            Self::Subordinator(S::Budget { .. }) => 3,
            Self::Subordinator(S::Alpha(_) | S::Mass(_) | S::Negative(_) | S::Grid(_) | S::SampleSize { .. }) => 2,
            Self::Subordinator(_) => 1,
            Self::Diffusion(D::Subordinator(S::Budget { .. })) => 3,
            Self::Diffusion(
                D::Parameter { .. }
                | D::Perturbation { .. }
                | D::Ordering { .. }
                | D::StepSize { .. }
                | D::Resolution { .. }
                | D::SampleSize { .. },
            ) => 2,
            Self::Diffusion(_) => 1,
            Self::Trace(TraceError::Dimension | TraceError::Radius(_) | TraceError::TimeGrid) => 2,
            Self::Trace(_) => 1,
            Self::Green(G::Budget { .. }) => 3,
            Self::Green(G::Domain { .. } | G::Index(_) | G::Bins(_) | G::SampleSize { .. }) => 2,
            Self::Green(_) => 1,
        }
    }
}

/// One pass/fail line of an experiment summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. "<= 1e-8".
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, threshold: format!("<= {limit:e}"), pass: value <= limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, threshold: format!(">= {limit:e}"), pass: value >= limit }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, threshold: format!("[{lo:e}, {hi:e}]"), pass: value >= lo && value <= hi }
    }

    pub fn flag(name: impl Into<String>, value: f64, threshold: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), value, threshold: threshold.into(), pass }
    }

    /// A reported quantity with no acceptance condition.
    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, threshold: "info".into(), pass: true }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: Experiment,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Files written, in write order.
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where CSVs go; nothing is written when None.
    pub out_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn writing_to(dir: impl Into<PathBuf>) -> Self {
        Self { out_dir: Some(dir.into()) }
    }
}

/// Runs `config.experiment` and writes `<stem>*.csv` plus
/// `<stem>_summary.csv` (columns check,value,threshold,pass).
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<Report, CliError> {
    config.validate()?;
    let (mut tables, checks) = experiments::dispatch(config)?;
    tables.push(output::summary_table(config.experiment, &checks));
    let mut files = Vec::new();
    if let Some(dir) = &options.out_dir {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        for t in &tables {
            files.push(t.write_to(dir)?);
        }
    }
    Ok(Report { experiment: config.experiment, checks, tables, files })
}

/// Convenience for callers holding a config file.
pub fn run_file(path: &Path, experiment: Option<Experiment>, options: &RunOptions) -> Result<Report, CliError> {
    run(&ExperimentConfig::from_file(path, experiment)?, options)
}
