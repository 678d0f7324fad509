//! Drift fields b(x) of reflected diffusions with generator ½ d²/dx² + b d/dx.

use std::fmt;
use std::sync::Arc;

use super::DiffusionError;
use crate::specfun::{drift_ratio, gamma};
use crate::subordinator::{Mass, StableIndex};

/// Points used to spot-check a perturbation and orderings between fields.
pub const SPOT_CHECK_POINTS: usize = 1000;
const SPOT_LO: f64 = 1e-6;
const SPOT_HI: f64 = 1e3;

/// A perturbation f ≥ 0 subtracted from the Bessel drift.
#[derive(Clone)]
pub struct Perturbation {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Perturbation {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f) }
    }

    /// f(x) = c1 (1 ∧ x)^{2α−1}, the extremal admissible perturbation.
    pub fn power(alpha: f64, c1: f64) -> Self {
        Self::new(format!("{c1}*(1^x)^({})", 2.0 * alpha - 1.0), move |x: f64| c1 * x.min(1.0).powf(2.0 * alpha - 1.0))
    }

    pub fn zero() -> Self {
        Self::new("0", |_| 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Perturbation").field("label", &self.label).finish()
    }
}

/// 10³ log-spaced points on [1e-6, 1e3].
pub fn spot_grid() -> Vec<f64> {
    let n = SPOT_CHECK_POINTS;
    (0..n).map(|i| SPOT_LO * (SPOT_HI / SPOT_LO).powf(i as f64 / (n - 1) as f64)).collect()
}

#[derive(Debug, Clone)]
pub enum DriftField {
    /// (1−2α)/(2x)
    Bessel { alpha: StableIndex<f64> },
    /// (1−2α)/(2x) + ρ′_m/ρ_m(x)
    RelativisticBessel { alpha: StableIndex<f64>, mass: Mass<f64> },
    /// (1−2α)/(2x) − f(x), 0 ≤ f ≤ c1 (1 ∧ x)^{2α−1}
    Perturbed { alpha: StableIndex<f64>, c1: f64, f: Perturbation },
}

impl DriftField {
    pub fn bessel(alpha: f64) -> Result<Self, DiffusionError> {
        Ok(Self::Bessel { alpha: StableIndex::new(alpha)? })
    }

    pub fn relativistic(alpha: f64, m: f64) -> Result<Self, DiffusionError> {
        Ok(Self::RelativisticBessel { alpha: StableIndex::new(alpha)?, mass: Mass::new(m)? })
    }

    /// Validates 0 ≤ f ≤ c1 (1 ∧ x)^{2α−1} on [`spot_grid`].
    pub fn perturbed(alpha: f64, c1: f64, f: Perturbation) -> Result<Self, DiffusionError> {
        let a = StableIndex::new(alpha)?;
        if !(c1 >= 0.0 && c1.is_finite()) {
            return Err(DiffusionError::Parameter { name: "c1", value: c1 });
        }
        for x in spot_grid() {
            let v = f.eval(x);
            let cap = c1 * x.min(1.0).powf(2.0 * alpha - 1.0);
            if !(v >= 0.0 && v <= cap * (1.0 + 1e-12)) {
                return Err(DiffusionError::Perturbation { x, value: v, bound: cap });
            }
        }
        Ok(Self::Perturbed { alpha: a, c1, f })
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Self::Bessel { alpha } | Self::RelativisticBessel { alpha, .. } | Self::Perturbed { alpha, .. } => alpha.get(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Bessel { alpha } => format!("bessel(alpha={})", alpha.get()),
            Self::RelativisticBessel { alpha, mass } => format!("relativistic(alpha={}, m={})", alpha.get(), mass.get()),
            Self::Perturbed { alpha, c1, f } => format!("perturbed(alpha={}, c1={c1}, f={})", alpha.get(), f.label()),
        }
    }
}

/// b(x) for x > 0.
pub fn drift_eval(field: &DriftField, x: f64) -> Result<f64, DiffusionError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(DiffusionError::Singularity(x));
    }
    let base = (1.0 - 2.0 * field.alpha()) / (2.0 * x);
    Ok(match field {
        DriftField::Bessel { .. } => base,
        DriftField::RelativisticBessel { alpha, mass } => base + drift_ratio(alpha.get(), mass.get(), x)?,
        DriftField::Perturbed { f, .. } => base - f.eval(x),
    })
}

/// Checks b_lower ≤ b_upper on [`spot_grid`].
pub fn check_drift_order(lower: &DriftField, upper: &DriftField) -> Result<(), DiffusionError> {
    for x in spot_grid() {
        let (a, b) = (drift_eval(lower, x)?, drift_eval(upper, x)?);
        if a > b + 1e-12 * b.abs().max(1.0) {
            return Err(DiffusionError::Ordering { x, lower: a, upper: b });
        }
    }
    Ok(())
}

/// Smallest m for which both ends of ρ′_m/ρ_m dominate c1 (1 ∧ x)^{2α−1}:
/// c1 ≤ √(2m) and c1 ≤ m^α Γ(1−α)/(2^{α−1}Γ(α)).
///
/// Both branches are increasing powers of m, so the root is explicit.
pub fn mass_from_c1(alpha: f64, c1: f64) -> Result<f64, DiffusionError> {
    StableIndex::new(alpha)?;
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(DiffusionError::Parameter { name: "c1", value: c1 });
    }
    let k = 2f64.powf(alpha - 1.0) * gamma(alpha)? / gamma(1.0 - alpha)?;
    Ok((0.5 * c1 * c1).max((c1 * k).powf(alpha.recip())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSelection {
    pub m: f64,
    /// Times m was doubled beyond [`mass_from_c1`].
    pub doublings: u32,
}

/// Starts from [`mass_from_c1`] and doubles m until f ≤ −ρ′_m/ρ_m holds on
/// [`spot_grid`].
pub fn mass_for_perturbation(alpha: f64, c1: f64, f: &Perturbation) -> Result<MassSelection, DiffusionError> {
    let mut m = mass_from_c1(alpha, c1)?;
    let grid = spot_grid();
    for doublings in 0..64 {
        let mut ok = true;
        for &x in &grid {
            if f.eval(x) > -drift_ratio(alpha, m, x)? * (1.0 + 1e-12) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(MassSelection { m, doublings });
        }
        m *= 2.0;
    }
    Err(DiffusionError::Parameter { name: "c1", value: c1 })
}
