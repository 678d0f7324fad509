//! Subordinators: Laplace exponents, Lévy densities, exact samplers and the
//! checks used to compare them.

mod checks;
mod exponent;
mod levy;
mod sampler;

pub use checks::{
    bernstein_check, complete_monotonicity_check, dominance_of_draws, levy_sandwich_check, stochastic_dominance_check,
    tail_sandwich_check, CmReport, DominanceReport, SandwichReport, DOMINANCE_LEVEL, MAX_CM_ORDER, MIN_DOMINANCE_DRAWS,
};
pub use exponent::{validate_bernstein, BernsteinReport, EmpiricalExponent, LaplaceExponent, Mass, StableIndex};
pub use levy::LevyDensity;
pub use sampler::{
    draw_many, sample_positive_stable, sample_relativistic, sample_stable, RelativisticSampler, StableSampler,
    SubordinatorSample, REJECTION_BUDGET,
};

use thiserror::Error;

use crate::quad::QuadError;
use crate::specfun::SpecfunError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubordinatorError {
    #[error("stability index {0} outside (0, 1)")]
    Alpha(f64),
    #[error("mass {0} must be finite and non-negative")]
    Mass(f64),
    #[error("argument {0} outside the domain")]
    Negative(f64),
    #[error("lambda {lambda} outside the tabulated range [{lo}, {hi}]")]
    Extrapolation { lambda: f64, lo: f64, hi: f64 },
    #[error("invalid grid: {0}")]
    Grid(&'static str),
    #[error("rejection sampler needs about {expected_rounds:.3e} rounds per draw, budget {budget:.0e}")]
    Budget { expected_rounds: f64, budget: f64 },
    #[error("sample has {got} draws, need at least {need}")]
    SampleSize { got: usize, need: usize },
    #[error("samples taken at different levels {lower} and {upper}")]
    LevelMismatch { lower: f64, upper: f64 },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("parallel execution failed: {0}")]
    Exec(String),
}
