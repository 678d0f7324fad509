//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    SpecfunCheck,
    Phi,
    Levy,
    Sample,
    CmCheck,
    Dominance,
    Simulate,
    Compare,
    LaplaceFit,
    Excursions,
    Trace,
    Green,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Self::SpecfunCheck,
        Self::Phi,
        Self::Levy,
        Self::Sample,
        Self::CmCheck,
        Self::Dominance,
        Self::Simulate,
        Self::Compare,
        Self::LaplaceFit,
        Self::Excursions,
        Self::Trace,
        Self::Green,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SpecfunCheck => "specfun-check",
            Self::Phi => "phi",
            Self::Levy => "levy",
            Self::Sample => "sample",
            Self::CmCheck => "cm-check",
            Self::Dominance => "dominance",
            Self::Simulate => "simulate",
            Self::Compare => "compare",
            Self::LaplaceFit => "laplace-fit",
            Self::Excursions => "excursions",
            Self::Trace => "trace",
            Self::Green => "green",
        }
    }

    /// File stem for the CSV outputs.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment '{s}'")))
    }
}

/// A mass given as a number or chosen from c1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassSpec {
    Value(f64),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeMode {
    /// Band width ε − η.
    Band,
    /// Fitted on reflected Brownian paths over {ε, 2ε, 4ε}.
    Calibrate,
}

/// Typed contents of a config file. Unset keys take per-experiment
/// defaults when the experiment runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha: Option<f64>,
    pub m: Option<MassSpec>,
    pub c1: Option<f64>,
    /// `T`
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_paths: Option<usize>,
    pub lambda_grid: Option<Vec<f64>>,
    pub lambda_ref: Option<f64>,
    pub s_grid: Option<Vec<f64>>,
    pub r_grid: Option<Vec<f64>>,
    pub bins: Option<usize>,
    pub master_seed: u64,
    pub workers: usize,

    pub suite: Option<Vec<String>>,
    pub alphas: Option<Vec<f64>>,
    pub masses: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub order: Option<usize>,
    pub d: Option<u32>,
    pub x0: Option<f64>,
    pub x: Option<f64>,
    pub t: Option<f64>,
    pub level: Option<f64>,
    pub time_cap: Option<f64>,
    pub process: Option<String>,
    pub lower_file: Option<PathBuf>,
    pub upper_file: Option<PathBuf>,
    pub gap: Option<f64>,
    pub step_budget: Option<f64>,
    pub n_random: Option<usize>,
    pub gauge: Option<GaugeMode>,
    pub thin: Option<usize>,
    pub tolerance: Option<f64>,
    pub ratio_range: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            alpha: None,
            m: None,
            c1: None,
            horizon: None,
            dt: None,
            epsilon: None,
            n_paths: None,
            lambda_grid: None,
            lambda_ref: None,
            s_grid: None,
            r_grid: None,
            bins: None,
            master_seed: 0,
            workers: 1,
            suite: None,
            alphas: None,
            masses: None,
            beta: None,
            order: None,
            d: None,
            x0: None,
            x: None,
            t: None,
            level: None,
            time_cap: None,
            process: None,
            lower_file: None,
            upper_file: None,
            gap: None,
            step_budget: None,
            n_random: None,
            gauge: None,
            thin: None,
            tolerance: None,
            ratio_range: None,
        }
    }

    /// Parses config text. `experiment` may be omitted when `default` is
    /// given; relative file paths resolve against `base`.
    pub fn parse(text: &str, default: Option<Experiment>, base: Option<&Path>) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key or value", i + 1)));
            }
            if pairs.iter().any(|(p, _, _): &(String, String, usize)| p == k) {
                return Err(CliError::Config(format!("line {}: duplicate key '{k}'", i + 1)));
            }
            pairs.push((k.to_string(), v.to_string(), i + 1));
        }
        let experiment = match (pairs.iter().find(|p| p.0 == "experiment"), default) {
            (Some(p), Some(d)) => {
                let e: Experiment = p.1.parse()?;
                if e != d {
                    return Err(CliError::Config(format!("config names experiment '{e}' but '{d}' was requested")));
                }
                e
            }
            (Some(p), None) => p.1.parse()?,
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::Config("no experiment given".into())),
        };
        let mut cfg = Self::new(experiment);
        for (k, v, line) in &pairs {
            cfg.set(k, v, base).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("line {line}: {msg}")),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, default: Option<Experiment>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, default, path.parent())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<(), CliError> {
        let path = |v: &str| {
            let p = PathBuf::from(v);
            match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        };
        match key {
            "experiment" => {}
            "alpha" => self.alpha = Some(num(key, value)?),
            "m" => {
                self.m = Some(if value == "auto" { MassSpec::Auto } else { MassSpec::Value(num(key, value)?) });
            }
            "c1" => self.c1 = Some(num(key, value)?),
            "T" => self.horizon = Some(num(key, value)?),
            "dt" => self.dt = Some(num(key, value)?),
            "epsilon" => self.epsilon = Some(num(key, value)?),
            "n_paths" => self.n_paths = Some(count(key, value)?),
            "lambda_grid" => self.lambda_grid = Some(list(key, value)?),
            "lambda_ref" => self.lambda_ref = Some(num(key, value)?),
            "s_grid" => self.s_grid = Some(list(key, value)?),
            "r_grid" => self.r_grid = Some(list(key, value)?),
            "bins" => self.bins = Some(count(key, value)?),
            "master_seed" => {
                self.master_seed = value.parse().map_err(|_| CliError::Config(format!("{key}: '{value}' is not a 64-bit seed")))?
            }
            "workers" => self.workers = count(key, value)?,
            "suite" => self.suite = Some(value.split(',').map(|s| s.trim().to_string()).collect()),
            "alphas" => self.alphas = Some(list(key, value)?),
            "masses" => self.masses = Some(list(key, value)?),
            "beta" => self.beta = Some(num(key, value)?),
            "order" => self.order = Some(count(key, value)?),
            "d" => {
                self.d = Some(value.parse().map_err(|_| CliError::Config(format!("{key}: '{value}' is not a dimension")))?)
            }
            "x0" => self.x0 = Some(num(key, value)?),
            "x" => self.x = Some(num(key, value)?),
            "t" => self.t = Some(num(key, value)?),
            "level" => self.level = Some(num(key, value)?),
            "time_cap" => self.time_cap = Some(num(key, value)?),
            "process" => self.process = Some(value.to_string()),
            "lower_file" => self.lower_file = Some(path(value)),
            "upper_file" => self.upper_file = Some(path(value)),
            "gap" => self.gap = Some(num(key, value)?),
            "step_budget" => self.step_budget = Some(num(key, value)?),
            "n_random" => self.n_random = Some(count(key, value)?),
            "gauge" => {
                self.gauge = Some(match value {
                    "band" => GaugeMode::Band,
                    "calibrate" => GaugeMode::Calibrate,
                    _ => return Err(CliError::Config(format!("gauge: expected band or calibrate, got '{value}'"))),
                })
            }
            "thin" => self.thin = Some(count(key, value)?),
            "tolerance" => self.tolerance = Some(num(key, value)?),
            "ratio_range" => self.ratio_range = Some(list(key, value)?),
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Range checks that do not depend on the experiment.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |name: &str, v: f64, want: &str| CliError::Config(format!("{name} = {v} must be {want}"));
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(bad("alpha", a, "in (0, 1)"));
            }
        }
        for a in self.alphas.iter().flatten() {
            if !(*a > 0.0 && *a < 1.0) {
                return Err(bad("alphas", *a, "in (0, 1)"));
            }
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b < 1.0) {
                return Err(bad("beta", b, "in (0, 1)"));
            }
        }
        if let Some(MassSpec::Value(m)) = self.m {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(bad("m", m, "finite and non-negative"));
            }
        }
        for m in self.masses.iter().flatten() {
            if !(*m >= 0.0 && m.is_finite()) {
                return Err(bad("masses", *m, "finite and non-negative"));
            }
        }
        let positive = [
            ("c1", self.c1),
            ("T", self.horizon),
            ("dt", self.dt),
            ("epsilon", self.epsilon),
            ("lambda_ref", self.lambda_ref),
            ("t", self.t),
            ("time_cap", self.time_cap),
            ("gap", self.gap),
            ("step_budget", self.step_budget),
            ("tolerance", self.tolerance),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad(name, v, "positive and finite"));
                }
            }
        }
        for (name, v) in [("x0", self.x0), ("level", self.level)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(bad(name, v, "finite and non-negative"));
                }
            }
        }
        if let Some(x) = self.x {
            if !(x > -1.0 && x < 1.0) {
                return Err(bad("x", x, "in (-1, 1)"));
            }
        }
        for (name, g) in [("lambda_grid", &self.lambda_grid), ("s_grid", &self.s_grid), ("r_grid", &self.r_grid)] {
            if let Some(g) = g {
                if g.is_empty() || g.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(CliError::Config(format!("{name} must hold positive finite values")));
                }
            }
        }
        if let Some(r) = &self.ratio_range {
            if r.len() != 2 || !(r[0] > 0.0 && r[0] < r[1]) {
                return Err(CliError::Config("ratio_range needs two values 0 < lo < hi".into()));
            }
        }
        for (name, v) in [("n_paths", self.n_paths), ("bins", self.bins), ("n_random", self.n_random), ("thin", self.thin)] {
            if v == Some(0) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be positive".into()));
        }
        if self.d == Some(0) {
            return Err(CliError::Config("d must be positive".into()));
        }
        Ok(())
    }
}

fn num(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>().map_err(|_| CliError::Config(format!("{key}: '{v}' is not a number")))
}

fn count(key: &str, v: &str) -> Result<usize, CliError> {
    // accept 1e4 style counts as long as they are integral
    if let Ok(n) = v.parse::<usize>() {
        return Ok(n);
    }
    let f = num(key, v)?;
    if f >= 0.0 && f.fract() == 0.0 && f < 1e15 {
        Ok(f as usize)
    } else {
        Err(CliError::Config(format!("{key}: '{v}' is not a non-negative integer")))
    }
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| num(key, s.trim())).collect()
}
