//! Green functions on D = (−1, 1): the closed form for the symmetric stable
//! process and a Monte Carlo occupation estimate for trace processes.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::quad::{Integrator, QuadError};
use crate::rng::{chunks, derive_substream, parallel_tasks, ExecError};
use crate::specfun::{c_alpha, gamma, SpecfunError};
use crate::subordinator::{RelativisticSampler, SubordinatorError};

pub const COMPARABILITY_CAP: f64 = 3.0;
/// Bins closer than this to ∂D or to the source are left out of ratios.
pub const EXCLUSION_RADIUS: f64 = 0.1;
pub const MIN_GREEN_PATHS: usize = 1000;
const PATHS_PER_TASK: usize = 250;
const PILOT_PATHS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error("point ({x}, {y}) outside (-1, 1)^2")]
    Domain { x: f64, y: f64 },
    #[error("index {0} outside (0, 2)")]
    Index(f64),
    #[error("diagonal is singular for index {0} <= 1")]
    Singularity(f64),
    #[error("invalid bins: {0}")]
    Bins(&'static str),
    #[error("need at least {need} paths, got {got}")]
    SampleSize { got: usize, need: usize },
    #[error("expected {expected:.3e} steps exceed the budget {budget:.3e}")]
    Budget { expected: f64, budget: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Subordinator(#[from] SubordinatorError),
    #[error("parallel execution failed: {0}")]
    Exec(String),
}

impl From<ExecError> for GreenError {
    fn from(e: ExecError) -> Self {
        Self::Exec(e.to_string())
    }
}

fn inside(x: f64) -> bool {
    x > -1.0 && x < 1.0
}

/// κ(1, β) = Γ(1/2) / (2^β π^{1/2} Γ(β/2)²).
fn kappa(beta: f64) -> Result<f64, GreenError> {
    Ok(1.0 / (2f64.powf(beta) * gamma(0.5 * beta)?.powi(2)))
}

/// ∫₀^w s^{a−1} (1+s)^{−1/2} ds.
fn riesz_integral(a: f64, w: f64) -> Result<f64, GreenError> {
    let q = Integrator::default();
    // s = u^{1/a} on [0, min(w,1)]
    let head = q.finite(|u: f64| (1.0 + u.powf(a.recip())).powf(-0.5), 0.0, w.min(1.0).powf(a))?.value / a;
    if w <= 1.0 {
        return Ok(head);
    }
    // s = e^v on [1, w]
    let tail = q.finite(|v: f64| (a * v).exp() * (1.0 + v.exp()).powf(-0.5), 0.0, w.ln())?.value;
    Ok(head + tail)
}

/// Green function of the symmetric β-stable process (exponent |ξ|^β) killed
/// on leaving (−1, 1):
/// κ(1,β) |x−y|^{β−1} ∫₀^w s^{β/2−1}(1+s)^{−1/2} ds, w = (1−x²)(1−y²)/(x−y)².
pub fn green_stable_interval(alpha2: f64, x: f64, y: f64) -> Result<f64, GreenError> {
    if !(alpha2 > 0.0 && alpha2 < 2.0) {
        return Err(GreenError::Index(alpha2));
    }
    if !(inside(x) && inside(y)) {
        return Err(GreenError::Domain { x, y });
    }
    let k = kappa(alpha2)?;
    if x == y {
        if alpha2 <= 1.0 {
            return Err(GreenError::Singularity(alpha2));
        }
        return Ok(k * 2.0 / (alpha2 - 1.0) * (1.0 - x * x).powf(alpha2 - 1.0));
    }
    let d = (x - y).abs();
    let w = (1.0 - x * x) * (1.0 - y * y) / (d * d);
    Ok(k * d.powf(alpha2 - 1.0) * riesz_integral(0.5 * alpha2, w)?)
}

/// Green function of B_{S_t} for the stable subordinator of index α, whose
/// exponent is c_α |ξ|^{2α}: the β = 2α closed form divided by c_α.
pub fn green_trace_stable(alpha: f64, x: f64, y: f64) -> Result<f64, GreenError> {
    Ok(green_stable_interval(2.0 * alpha, x, y)? / c_alpha(alpha)?)
}

/// `n` equal bins over D, as n + 1 edges.
pub fn uniform_bins(n: usize) -> Vec<f64> {
    (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenConfig {
    pub alpha: f64,
    pub m: f64,
    pub x: f64,
    /// Bin edges, increasing.
    pub bins: Vec<f64>,
    pub n_paths: usize,
    /// Step of the subordinator time grid.
    pub gap: f64,
    /// A path still inside D after this many steps is cut off.
    pub max_steps: u64,
    /// Largest total number of steps the run may take.
    pub step_budget: f64,
}

impl GreenConfig {
    /// 40 bins, gap 0.01, 10⁵ paths.
    pub fn standard(alpha: f64, m: f64, x: f64) -> Self {
        Self { alpha, m, x, bins: uniform_bins(40), n_paths: 100_000, gap: 0.01, max_steps: 1_000_000, step_budget: 5e9 }
    }
}

/// Occupation density of the killed trace process started at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenEstimate {
    pub x: f64,
    pub alpha: f64,
    pub m: f64,
    pub bins: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: usize,
    pub mean_exit_time: f64,
    /// Paths cut off by `max_steps`.
    pub truncated: usize,
}

impl GreenEstimate {
    pub fn centres(&self) -> Vec<f64> {
        self.bins.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

struct Occupation {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    time: f64,
    truncated: usize,
}

/// Runs one killed path, adding gap · 1{X_k ∈ bin} into `occ`; returns the
/// step count and whether the path was cut off.
fn killed_path<R: Rng + ?Sized>(
    sampler: &RelativisticSampler,
    x0: f64,
    bins: &[f64],
    gap: f64,
    max_steps: u64,
    occ: Option<&mut Vec<f64>>,
    rng: &mut R,
) -> (u64, bool) {
    let mut x = x0;
    let mut steps = 0u64;
    let mut occ = occ;
    while inside(x) {
        if steps == max_steps {
            return (steps, true);
        }
        if let Some(o) = occ.as_deref_mut() {
            let j = bins.partition_point(|&e| e <= x);
            if j > 0 && j < bins.len() {
                o[j - 1] += gap;
            }
        }
        let ds = sampler.sample(rng);
        x += (2.0 * ds).sqrt() * rng.sample::<f64, _>(StandardNormal);
        steps += 1;
    }
    (steps, false)
}

/// Monte Carlo estimate of G_D(x, ·) for B_{S_t} with S relativistic stable
/// of mass m (stable when m = 0), on a subordinator grid of step `gap`.
/// Paths are grouped in fixed blocks on their own substreams, so the result
/// does not depend on `workers`.
pub fn green_mc_estimate(cfg: &GreenConfig, seed: u64, workers: usize) -> Result<GreenEstimate, GreenError> {
    if !inside(cfg.x) {
        return Err(GreenError::Domain { x: cfg.x, y: cfg.x });
    }
    if cfg.n_paths < MIN_GREEN_PATHS {
        return Err(GreenError::SampleSize { got: cfg.n_paths, need: MIN_GREEN_PATHS });
    }
    if cfg.bins.len() < 2 || !cfg.bins.windows(2).all(|w| w[0] < w[1]) {
        return Err(GreenError::Bins("need at least two increasing edges"));
    }
    let sampler = RelativisticSampler::new(cfg.alpha, cfg.m, cfg.gap)?;
    // pilot on a stream no task uses
    let mut pilot = derive_substream(seed, u64::MAX);
    let pilot_steps: u64 =
        (0..PILOT_PATHS).map(|_| killed_path(&sampler, cfg.x, &cfg.bins, cfg.gap, cfg.max_steps, None, &mut pilot).0).sum();
    let expected = pilot_steps as f64 / PILOT_PATHS as f64 * cfg.n_paths as f64;
    if expected > cfg.step_budget {
        return Err(GreenError::Budget { expected, budget: cfg.step_budget });
    }
    let nb = cfg.bins.len() - 1;
    let parts = chunks(cfg.n_paths, PATHS_PER_TASK);
    let blocks = parallel_tasks(parts.len(), workers, seed, |i, rng| {
        let mut acc = Occupation { sum: vec![0.0; nb], sum_sq: vec![0.0; nb], time: 0.0, truncated: 0 };
        let mut occ = vec![0.0; nb];
        for _ in 0..parts[i].1 {
            occ.iter_mut().for_each(|v| *v = 0.0);
            let (steps, cut) = killed_path(&sampler, cfg.x, &cfg.bins, cfg.gap, cfg.max_steps, Some(&mut occ), rng);
            acc.time += steps as f64 * cfg.gap;
            acc.truncated += cut as usize;
            for j in 0..nb {
                acc.sum[j] += occ[j];
                acc.sum_sq[j] += occ[j] * occ[j];
            }
        }
        acc
    })?;
    let n = cfg.n_paths as f64;
    let mut sum = vec![0.0; nb];
    let mut sum_sq = vec![0.0; nb];
    let (mut time, mut truncated) = (0.0, 0);
    for b in &blocks {
        for j in 0..nb {
            sum[j] += b.sum[j];
            sum_sq[j] += b.sum_sq[j];
        }
        time += b.time;
        truncated += b.truncated;
    }
    let mut values = Vec::with_capacity(nb);
    let mut stderr = Vec::with_capacity(nb);
    for j in 0..nb {
        let width = cfg.bins[j + 1] - cfg.bins[j];
        let mean = sum[j] / n;
        let var = ((sum_sq[j] / n - mean * mean) * n / (n - 1.0)).max(0.0);
        values.push(mean / width);
        stderr.push((var / n).sqrt() / width);
    }
    Ok(GreenEstimate {
        x: cfg.x,
        alpha: cfg.alpha,
        m: cfg.m,
        bins: cfg.bins.clone(),
        values,
        stderr,
        n_paths: cfg.n_paths,
        mean_exit_time: time / n,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenRatioReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub ok: bool,
    pub cap: f64,
    /// Per-bin ratio; NaN for excluded bins.
    pub ratios: Vec<f64>,
    /// Bin averages of the reference Green function; NaN for excluded bins.
    pub reference: Vec<f64>,
}

impl GreenRatioReport {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.min_ratio >= lo && self.max_ratio <= hi
    }
}

/// Ratios of `est` to the bin averages of the trace Green function of the
/// stable subordinator with index alpha2/2, over bins at least 0.1 away
/// from ∂D and from the source. ok iff every ratio lies in [1/3, 3].
pub fn green_ratio_report(est: &GreenEstimate, alpha2: f64) -> Result<GreenRatioReport, GreenError> {
    let alpha = 0.5 * alpha2;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GreenError::Index(alpha2));
    }
    let q = Integrator::with_rel_tol(1e-8);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    let mut ratios = Vec::with_capacity(est.values.len());
    let mut reference = Vec::with_capacity(est.values.len());
    for (j, w) in est.bins.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let near_source = est.x > a - EXCLUSION_RADIUS && est.x < b + EXCLUSION_RADIUS;
        if a < -1.0 + EXCLUSION_RADIUS || b > 1.0 - EXCLUSION_RADIUS || near_source {
            ratios.push(f64::NAN);
            reference.push(f64::NAN);
            continue;
        }
        let mut failure = None;
        let avg = q
            .finite(
                |y: f64| {
                    green_trace_stable(alpha, est.x, y).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        0.0
                    })
                },
                a,
                b,
            )?
            .value
            / (b - a);
        if let Some(e) = failure {
            return Err(e);
        }
        let r = est.values[j] / avg;
        lo = lo.min(r);
        hi = hi.max(r);
        ratios.push(r);
        reference.push(avg);
    }
    if !lo.is_finite() {
        return Err(GreenError::Bins("no bin away from the boundary and the source"));
    }
    let cap = COMPARABILITY_CAP;
    let ok = lo.is_finite() && hi.is_finite() && lo >= cap.recip() && hi <= cap;
    Ok(GreenRatioReport { min_ratio: lo, max_ratio: hi, ok, cap, ratios, reference })
}
