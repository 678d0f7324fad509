//! Inverse local times at zero of Bessel-type diffusions.
//!
//! The analytic half of the crate (special functions, quadrature, Laplace
//! exponents, Lévy densities, trace-process densities) is generic over
//! [`Real`], so it runs in `f32` or `f64`. The Monte Carlo half (samplers,
//! path simulation, Green-function estimates) is `f64` only.
//!
//! Concrete aliases for the common `f64` instantiations live at the crate
//! root, e.g. [`Exponent`] and [`Levy`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub mod diffusion;
pub mod green;
pub mod quad;
pub mod rng;
pub mod specfun;
pub mod subordinator;
pub mod trace;

/// Scalar type accepted by the generic numerical kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every supported scalar can represent (a
    /// rounding of) any finite `f64`, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion used for error payloads and reports.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Integrator = quad::Integrator<f64>;
pub type Integrator32 = quad::Integrator<f32>;
pub type Asymptote = specfun::Asymptote<f64>;
pub type Exponent = subordinator::LaplaceExponent<f64>;
pub type Exponent32 = subordinator::LaplaceExponent<f32>;
pub type Levy = subordinator::LevyDensity<f64>;
pub type Levy32 = subordinator::LevyDensity<f32>;
pub type StableIndex = subordinator::StableIndex<f64>;
pub type Mass = subordinator::Mass<f64>;
pub type EmpiricalExponent = subordinator::EmpiricalExponent<f64>;
