//! One function per experiment, each returning its tables and checks.

use ilt_core::diffusion::{calibrate_gauge, mass_for_perturbation, Band, Perturbation};

use crate::{Check, CliError, Experiment, ExperimentConfig, GaugeMode, MassSpec, Table, DEFAULT_STEP_BUDGET};

mod analytic;
mod paths;
mod sampling;
mod spatial;

pub(crate) type Outcome = (Vec<Table>, Vec<Check>);

pub(crate) fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cfg.experiment {
        Experiment::SpecfunCheck => analytic::specfun_check(cfg),
        Experiment::Phi => analytic::phi(cfg),
        Experiment::Levy => analytic::levy(cfg),
        Experiment::CmCheck => analytic::cm_check(cfg),
        Experiment::Sample => sampling::sample(cfg),
        Experiment::Dominance => sampling::dominance(cfg),
        Experiment::Simulate => paths::simulate(cfg),
        Experiment::Compare => paths::compare(cfg),
        Experiment::LaplaceFit => paths::laplace_fit(cfg),
        Experiment::Excursions => paths::excursions(cfg),
        Experiment::Trace => spatial::trace(cfg),
        Experiment::Green => spatial::green(cfg),
    }
}

/// `n` points from `a` to `b`, evenly spaced in log.
pub(crate) fn geom(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

pub(crate) fn alpha_or(cfg: &ExperimentConfig, default: f64) -> f64 {
    cfg.alpha.unwrap_or(default)
}

/// Mass from the config; `auto` picks the smallest admissible m for the
/// perturbation c1 (1 ∧ x)^{2α−1}.
pub(crate) fn mass_or(cfg: &ExperimentConfig, alpha: f64, default: f64) -> Result<f64, CliError> {
    Ok(match cfg.m {
        Some(MassSpec::Value(m)) => m,
        Some(MassSpec::Auto) => {
            let c1 = cfg.c1.unwrap_or(1.0);
            mass_for_perturbation(alpha, c1, &Perturbation::power(alpha, c1))?.m
        }
        None => default,
    })
}

pub(crate) fn check_budget(cfg: &ExperimentConfig, expected: f64) -> Result<(), CliError> {
    let budget = cfg.step_budget.unwrap_or(DEFAULT_STEP_BUDGET);
    if expected > budget {
        return Err(CliError::Budget { expected, budget });
    }
    Ok(())
}

/// Band from `epsilon` (default 3√dt) and the gauge mode. Calibration uses
/// 1000 reflected Brownian paths on a seed derived from the master seed.
pub(crate) fn band_for(cfg: &ExperimentConfig, dt: f64, horizon: f64, checks: &mut Vec<Check>) -> Result<Band, CliError> {
    let eps = cfg.epsilon.unwrap_or(3.0 * dt.sqrt());
    let band = match cfg.gauge.unwrap_or(GaugeMode::Band) {
        GaugeMode::Band => Band::new(eps)?,
        GaugeMode::Calibrate => {
            let cal = calibrate_gauge(eps, dt, horizon, 1000, cfg.master_seed ^ 0x5eed_ca1b, cfg.workers)?;
            for (e, g) in cal.epsilons.iter().zip(&cal.gauges) {
                checks.push(Check::info(format!("gauge_at_eps_{e:.3e}"), *g));
            }
            cal.band()?
        }
    };
    band.check_resolution(dt)?;
    checks.push(Check::info("epsilon", band.epsilon));
    checks.push(Check::info("gauge", band.gauge));
    Ok(band)
}
