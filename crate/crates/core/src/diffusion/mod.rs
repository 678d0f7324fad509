//! Reflected diffusions on [0, ∞): drift fields, simulation, local time at 0
//! and its inverse, and the estimators built on them.

mod analysis;
mod drift;
mod experiments;
mod localtime;
mod scheme;

pub use analysis::{
    empirical_laplace_ratio, excursion_tail_estimate, girsanov_condition_bound, laplace_ratio_with_error, occupation_integral,
    rho_ode_residual, ExcursionTail, LaplaceRatio, MIN_LAPLACE_DRAWS, MIN_TAIL_EXCURSIONS,
};
pub use drift::{
    check_drift_order, drift_eval, mass_for_perturbation, mass_from_c1, spot_grid, DriftField, MassSelection, Perturbation,
    SPOT_CHECK_POINTS,
};
pub use experiments::{
    inverse_local_time_sample, run_coupled, CoupledConfig, CoupledSummary, LaplaceProcess, LaplaceRunConfig, Triple,
};
pub use localtime::{
    calibrate_gauge, inverse_local_time, local_time, Band, DowncrossingCounter, Excursion, GaugeCalibration, InverseLocalTime,
    LocalTimeEstimate, RESOLUTION_FACTOR,
};
pub use scheme::{
    simulate_bessel_exact, simulate_coupled, simulate_reflected, step_count, zero_set_violation_fraction, CompiledDrift,
    CoupledPaths, EulerStepper, ExactBesselStepper, Reflection, SamplePath, ORDER_TOLERANCE, STABILITY_CAP,
};

use thiserror::Error;

use crate::quad::QuadError;
use crate::rng::ExecError;
use crate::specfun::SpecfunError;
use crate::subordinator::SubordinatorError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffusionError {
    #[error("drift is singular at x = {0}")]
    Singularity(f64),
    #[error("invalid {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("perturbation f({x}) = {value} outside [0, {bound}]")]
    Perturbation { x: f64, value: f64, bound: f64 },
    #[error("drifts not ordered at x = {x}: {lower} > {upper}")]
    Ordering { x: f64, lower: f64, upper: f64 },
    #[error("step dt = {dt} too large for sup|b| = {sup_drift}")]
    StepSize { dt: f64, sup_drift: f64 },
    #[error("epsilon = {epsilon} below the resolution 3*sqrt(dt) = {need}")]
    Resolution { epsilon: f64, need: f64 },
    #[error("level {level} not below the final local time {available}")]
    LevelExceeded { level: f64, available: f64 },
    #[error("sample has {got} draws, need at least {need}")]
    SampleSize { got: usize, need: usize },
    #[error("only {got} excursions exceed the smallest s, need {need}")]
    InsufficientExcursions { got: usize, need: usize },
    #[error("degenerate estimate: {0}")]
    Degenerate(&'static str),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Subordinator(#[from] SubordinatorError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("parallel execution failed: {0}")]
    Exec(String),
}

impl From<ExecError> for DiffusionError {
    fn from(e: ExecError) -> Self {
        Self::Exec(e.to_string())
    }
}
