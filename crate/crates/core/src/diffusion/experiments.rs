//! Multi-path runs: the coupled sandwich X^(α,m) ≤ Y ≤ X^(α) and inverse
//! local time samples at a fixed level.

use rand::Rng;
use rand_distr::StandardNormal;

use super::drift::{check_drift_order, mass_for_perturbation, DriftField, Perturbation};
use super::localtime::{Band, DowncrossingCounter, LocalTimeEstimate};
use super::scheme::{step_count, EulerStepper, ExactBesselStepper, Reflection, ORDER_TOLERANCE};
use super::DiffusionError;
use crate::rng::parallel_tasks;
use crate::subordinator::SubordinatorSample;

/// One value per process of the sandwich, lowest drift first.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple<T> {
    pub relativistic: T,
    pub perturbed: T,
    pub bessel: T,
}

impl<T> Triple<T> {
    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Triple<U> {
        Triple { relativistic: f(&self.relativistic), perturbed: f(&self.perturbed), bessel: f(&self.bessel) }
    }
}

#[derive(Debug, Clone)]
pub struct CoupledConfig {
    pub alpha: f64,
    pub c1: f64,
    /// None selects m by [`mass_for_perturbation`].
    pub mass: Option<f64>,
    pub x0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub band: Band,
    pub n_paths: usize,
    /// None uses `level_fraction` · median L_T of the Bessel paths.
    pub level: Option<f64>,
    pub level_fraction: f64,
    /// Excursions shorter than this (time units) are not kept.
    pub excursion_min: f64,
}

impl CoupledConfig {
    /// dt = 1e-5, T = 1, ε = 3√dt, N = 10⁴, x0 = 0.
    pub fn standard(alpha: f64, c1: f64) -> Result<Self, DiffusionError> {
        let dt = 1e-5;
        Ok(Self {
            alpha,
            c1,
            mass: None,
            x0: 0.0,
            horizon: 1.0,
            dt,
            band: Band::new(3.0 * dt.sqrt())?,
            n_paths: 10_000,
            level: None,
            level_fraction: 0.5,
            excursion_min: 1e-3,
        })
    }

    pub fn fields(&self, m: f64) -> Result<Triple<DriftField>, DiffusionError> {
        Ok(Triple {
            relativistic: DriftField::relativistic(self.alpha, m)?,
            perturbed: DriftField::perturbed(self.alpha, self.c1, Perturbation::power(self.alpha, self.c1))?,
            bessel: DriftField::bessel(self.alpha)?,
        })
    }

    pub fn steps(&self) -> Result<usize, DiffusionError> {
        step_count(self.horizon, self.dt)
    }
}

#[derive(Debug, Clone)]
pub struct CoupledSummary {
    pub m: f64,
    pub level: f64,
    pub grid_points: u64,
    /// Fractions of grid points with X^(α,m) > Y and with Y > X^(α).
    pub order_violations: [f64; 2],
    /// Fractions of grid points breaking mask(Y) ⊆ mask(X^(α,m)) and
    /// mask(X^(α)) ⊆ mask(Y).
    pub zero_set_violations: [f64; 2],
    pub local_times: Triple<Vec<LocalTimeEstimate>>,
    /// S at `level`, +∞ where L_T ≤ level.
    pub inverse_times: Triple<Vec<f64>>,
}

struct PathOutcome {
    l: Triple<LocalTimeEstimate>,
    order_bad: [u64; 2],
    zero_bad: [u64; 2],
}

/// Simulates `n_paths` common-noise triples X^(α,m) ≤ Y ≤ X^(α) with the
/// perturbation f = c1 (1 ∧ x)^{2α−1}; path i uses substream i.
pub fn run_coupled(cfg: &CoupledConfig, seed: u64, workers: usize) -> Result<CoupledSummary, DiffusionError> {
    if !(cfg.x0 >= 0.0) {
        return Err(DiffusionError::Parameter { name: "x0", value: cfg.x0 });
    }
    if cfg.n_paths == 0 {
        return Err(DiffusionError::SampleSize { got: 0, need: 1 });
    }
    cfg.band.check_resolution(cfg.dt)?;
    let m = match cfg.mass {
        Some(m) => m,
        None => mass_for_perturbation(cfg.alpha, cfg.c1, &Perturbation::power(cfg.alpha, cfg.c1))?.m,
    };
    let fields = cfg.fields(m)?;
    check_drift_order(&fields.relativistic, &fields.perturbed)?;
    check_drift_order(&fields.perturbed, &fields.bessel)?;
    let steppers = Triple {
        relativistic: EulerStepper::new(&fields.relativistic, cfg.dt, Reflection::Projection)?,
        perturbed: EulerStepper::new(&fields.perturbed, cfg.dt, Reflection::Projection)?,
        bessel: EulerStepper::new(&fields.bessel, cfg.dt, Reflection::Projection)?,
    };
    let n = cfg.steps()?;
    let min_exc = (cfg.excursion_min / cfg.dt).floor().max(1.0) as u32;
    let eps = cfg.band.epsilon;

    let outcomes = parallel_tasks(cfg.n_paths, workers, seed, |_, rng| {
        let counter = || DowncrossingCounter::new(cfg.band, cfg.x0, min_exc, false);
        let (mut c0, mut c1, mut c2) = (counter(), counter(), counter());
        let (mut a, mut b, mut c) = (cfg.x0, cfg.x0, cfg.x0);
        let mut order_bad = [0u64; 2];
        let mut zero_bad = [0u64; 2];
        for _ in 0..n {
            let xi: f64 = rng.sample(StandardNormal);
            a = steppers.relativistic.step(a, xi);
            b = steppers.perturbed.step(b, xi);
            c = steppers.bessel.step(c, xi);
            order_bad[0] += (a > b + ORDER_TOLERANCE) as u64;
            order_bad[1] += (b > c + ORDER_TOLERANCE) as u64;
            zero_bad[0] += (b <= eps && a > eps) as u64;
            zero_bad[1] += (c <= eps && b > eps) as u64;
            c0.push(a);
            c1.push(b);
            c2.push(c);
        }
        PathOutcome {
            l: Triple { relativistic: c0.finish(cfg.dt), perturbed: c1.finish(cfg.dt), bessel: c2.finish(cfg.dt) },
            order_bad,
            zero_bad,
        }
    })?;

    let grid_points = cfg.n_paths as u64 * n as u64;
    let frac = |k: usize, f: &dyn Fn(&PathOutcome) -> [u64; 2]| {
        outcomes.iter().map(|o| f(o)[k]).sum::<u64>() as f64 / grid_points as f64
    };
    let order_violations = [frac(0, &|o| o.order_bad), frac(1, &|o| o.order_bad)];
    let zero_set_violations = [frac(0, &|o| o.zero_bad), frac(1, &|o| o.zero_bad)];

    let mut local_times = Triple { relativistic: Vec::new(), perturbed: Vec::new(), bessel: Vec::new() };
    for o in outcomes {
        local_times.relativistic.push(o.l.relativistic);
        local_times.perturbed.push(o.l.perturbed);
        local_times.bessel.push(o.l.bessel);
    }
    let level = match cfg.level {
        Some(l) => l,
        None => {
            let mut totals: Vec<f64> = local_times.bessel.iter().map(|l| l.total()).collect();
            totals.sort_by(f64::total_cmp);
            let med = totals[totals.len() / 2];
            if med == 0.0 {
                return Err(DiffusionError::Degenerate("median local time of the Bessel paths is 0"));
            }
            cfg.level_fraction * med
        }
    };
    if !(level >= 0.0 && level.is_finite()) {
        return Err(DiffusionError::Parameter { name: "level", value: level });
    }
    let inverse_times = local_times.map(|ls| ls.iter().map(|l| l.inverse_or_censored(level)).collect());
    Ok(CoupledSummary { m, level, grid_points, order_violations, zero_set_violations, local_times, inverse_times })
}

#[derive(Debug, Clone)]
pub enum LaplaceProcess {
    /// Exact squared-Bessel skeleton.
    ExactBessel { alpha: f64 },
    /// Euler scheme with |·| reflection.
    Euler(DriftField),
}

#[derive(Debug, Clone)]
pub struct LaplaceRunConfig {
    pub process: LaplaceProcess,
    pub x0: f64,
    pub dt: f64,
    pub band: Band,
    /// Local-time level at which S is sampled.
    pub level: f64,
    pub n_paths: usize,
    /// Paths still short of the level at this time are censored (S = +∞).
    pub time_cap: f64,
}

/// Draws S at `level`, stopping each path as soon as the level is crossed.
pub fn inverse_local_time_sample(cfg: &LaplaceRunConfig, seed: u64, workers: usize) -> Result<SubordinatorSample, DiffusionError> {
    cfg.band.check_resolution(cfg.dt)?;
    if !(cfg.level >= 0.0 && cfg.level.is_finite()) {
        return Err(DiffusionError::Parameter { name: "level", value: cfg.level });
    }
    if !(cfg.x0 >= 0.0) {
        return Err(DiffusionError::Parameter { name: "x0", value: cfg.x0 });
    }
    let cap = step_count(cfg.time_cap, cfg.dt)?;
    let need = (cfg.level / cfg.band.gauge).floor() as usize + 1;
    enum Stepper {
        Exact(ExactBesselStepper),
        Euler(EulerStepper),
    }
    let stepper = match &cfg.process {
        LaplaceProcess::ExactBessel { alpha } => Stepper::Exact(ExactBesselStepper::new(*alpha, cfg.dt)?),
        LaplaceProcess::Euler(f) => Stepper::Euler(EulerStepper::new(f, cfg.dt, Reflection::Absolute)?),
    };
    let draws = parallel_tasks(cfg.n_paths, workers, seed, |_, rng| {
        let mut c = DowncrossingCounter::new(cfg.band, cfg.x0, u32::MAX, false);
        let mut x = cfg.x0;
        for _ in 0..cap {
            x = match &stepper {
                Stepper::Exact(s) => s.step(x, rng),
                Stepper::Euler(s) => s.step(x, rng.sample(StandardNormal)),
            };
            c.push(x);
            if c.count() >= need {
                return c.steps() as f64 * cfg.dt;
            }
        }
        f64::INFINITY
    })?;
    Ok(SubordinatorSample { level: cfg.level, draws, seed: Some(seed) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupled_run_is_ordered_and_reproducible() {
        let mut cfg = CoupledConfig::standard(0.25, 1.0).unwrap();
        cfg.n_paths = 8;
        cfg.horizon = 0.05;
        let a = run_coupled(&cfg, 42, 1).unwrap();
        let b = run_coupled(&cfg, 42, 3).unwrap();
        assert_eq!(a.inverse_times, b.inverse_times);
        assert!(a.order_violations.iter().all(|&v| v <= 1e-3));
        assert!(a.zero_set_violations.iter().all(|&v| v <= 1e-3));
        for i in 0..8 {
            assert!(a.local_times.relativistic[i].total() >= a.local_times.bessel[i].total() - 1e-12 || a.m > 0.0);
        }
    }

    #[test]
    fn early_stop_matches_full_path() {
        let dt = 1e-4;
        let cfg = LaplaceRunConfig {
            process: LaplaceProcess::ExactBessel { alpha: 0.5 },
            x0: 0.0,
            dt,
            band: Band::new(3.0 * dt.sqrt()).unwrap(),
            level: 0.1,
            n_paths: 16,
            time_cap: 2.0,
        };
        let s = inverse_local_time_sample(&cfg, 7, 1).unwrap();
        // replay path 0 in full and invert
        let mut rng = crate::rng::derive_substream(7, 0);
        let p = super::super::simulate_bessel_exact(0.5, 0.0, 2.0, dt, &mut rng).unwrap();
        let l = super::super::local_time(&p, cfg.band).unwrap();
        assert_eq!(s.draws[0], l.inverse_or_censored(0.1));
    }
}
