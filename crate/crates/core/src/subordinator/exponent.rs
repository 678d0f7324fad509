//! Laplace exponents of the stable and relativistic stable subordinators.

use super::SubordinatorError;
use crate::specfun::c_alpha;
use crate::Real;

/// Stability index α ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StableIndex<T>(T);

impl<T: Real> StableIndex<T> {
    pub fn new(alpha: T) -> Result<Self, SubordinatorError> {
        if alpha > T::zero() && alpha < T::one() {
            Ok(Self(alpha))
        } else {
            Err(SubordinatorError::Alpha(alpha.as_f64()))
        }
    }

    pub fn get(self) -> T {
        self.0
    }

    /// c_α = α/Γ(1−α).
    pub fn c(self) -> T {
        // Γ(1−α) has no pole for α ∈ (0, 1).
        c_alpha(self.0).expect("alpha validated")
    }
}

/// Mass m ≥ 0 of a relativistic stable subordinator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Mass<T>(T);

impl<T: Real> Mass<T> {
    pub fn new(m: T) -> Result<Self, SubordinatorError> {
        if m >= T::zero() && m.is_finite() {
            Ok(Self(m))
        } else {
            Err(SubordinatorError::Mass(m.as_f64()))
        }
    }

    pub fn get(self) -> T {
        self.0
    }
}

/// Tabulated exponent, interpolated linearly in log λ.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalExponent<T> {
    lambda_grid: Vec<T>,
    phi_values: Vec<T>,
}

impl<T: Real> EmpiricalExponent<T> {
    pub fn new(lambda_grid: Vec<T>, phi_values: Vec<T>) -> Result<Self, SubordinatorError> {
        let ok_len = lambda_grid.len() >= 2 && lambda_grid.len() == phi_values.len();
        let increasing = lambda_grid.windows(2).all(|w| w[0] < w[1]);
        let positive = lambda_grid.first().is_some_and(|&l| l > T::zero());
        if !(ok_len && increasing && positive) || phi_values.iter().any(|v| !v.is_finite()) {
            return Err(SubordinatorError::Grid("empirical exponent needs ≥ 2 increasing positive nodes with finite values"));
        }
        Ok(Self { lambda_grid, phi_values })
    }

    pub fn lambda_grid(&self) -> &[T] {
        &self.lambda_grid
    }

    pub fn phi_values(&self) -> &[T] {
        &self.phi_values
    }

    pub fn eval(&self, lambda: T) -> Result<T, SubordinatorError> {
        if lambda == T::zero() {
            return Ok(T::zero());
        }
        let g = &self.lambda_grid;
        let (lo, hi) = (g[0], g[g.len() - 1]);
        if !(lambda >= lo && lambda <= hi) {
            return Err(SubordinatorError::Extrapolation { lambda: lambda.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let j = g.partition_point(|&x| x <= lambda).min(g.len() - 1).max(1);
        let (a, b) = (g[j - 1], g[j]);
        let w = (lambda.ln() - a.ln()) / (b.ln() - a.ln());
        Ok(self.phi_values[j - 1] + w * (self.phi_values[j] - self.phi_values[j - 1]))
    }
}

/// Laplace exponent φ with E e^{−λ S_t} = e^{−t φ(λ)}.
#[derive(Debug, Clone, PartialEq)]
pub enum LaplaceExponent<T> {
    /// c_α λ^α
    Stable { alpha: StableIndex<T> },
    /// c_α ((λ+m)^α − m^α)
    RelativisticStable { alpha: StableIndex<T>, mass: Mass<T> },
    /// φ(λ + m) − φ(m)
    EsscherShift { base: Box<LaplaceExponent<T>>, mass: Mass<T> },
    Empirical(EmpiricalExponent<T>),
}

impl<T: Real> LaplaceExponent<T> {
    pub fn stable(alpha: T) -> Result<Self, SubordinatorError> {
        Ok(Self::Stable { alpha: StableIndex::new(alpha)? })
    }

    pub fn relativistic(alpha: T, m: T) -> Result<Self, SubordinatorError> {
        Ok(Self::RelativisticStable { alpha: StableIndex::new(alpha)?, mass: Mass::new(m)? })
    }

    /// Evaluates φ(λ) for λ ≥ 0.
    pub fn eval(&self, lambda: T) -> Result<T, SubordinatorError> {
        if !(lambda >= T::zero()) {
            return Err(SubordinatorError::Negative(lambda.as_f64()));
        }
        match self {
            Self::Stable { alpha } => Ok(alpha.c() * lambda.powf(alpha.get())),
            Self::RelativisticStable { alpha, mass } => {
                let (a, m) = (alpha.get(), mass.get());
                if m == T::zero() {
                    return Ok(alpha.c() * lambda.powf(a));
                }
                // m^α (exp(α log1p(λ/m)) − 1) keeps accuracy for λ ≪ m.
                Ok(alpha.c() * m.powf(a) * (a * (lambda / m).ln_1p()).exp_m1())
            }
            Self::EsscherShift { base, mass } => {
                let m = mass.get();
                Ok(base.eval(lambda + m)? - base.eval(m)?)
            }
            Self::Empirical(e) => e.eval(lambda),
        }
    }

    /// The tilted exponent λ ↦ φ(λ + m) − φ(m). A zero shift returns φ.
    pub fn esscher(&self, m: T) -> Result<Self, SubordinatorError> {
        let mass = Mass::new(m)?;
        if m == T::zero() {
            return Ok(self.clone());
        }
        Ok(Self::EsscherShift { base: Box::new(self.clone()), mass })
    }

    /// Stability index of the closed-form families (through any shifts).
    pub fn alpha(&self) -> Option<StableIndex<T>> {
        match self {
            Self::Stable { alpha } | Self::RelativisticStable { alpha, .. } => Some(*alpha),
            Self::EsscherShift { base, .. } => base.alpha(),
            Self::Empirical(_) => None,
        }
    }
}

/// Outcome of the Bernstein-function sanity checks on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinReport {
    pub ok: bool,
    pub phi_at_zero: f64,
    /// Largest drop between consecutive grid values.
    pub monotone_violation: f64,
    /// Largest increase between consecutive chord slopes.
    pub concavity_violation: f64,
}

/// Checks φ(0) = 0, monotonicity and concavity of φ on `grid`.
pub fn validate_bernstein<T: Real>(phi: &LaplaceExponent<T>, grid: &[T]) -> Result<BernsteinReport, SubordinatorError> {
    if grid.len() < 3 || !grid.windows(2).all(|w| w[0] < w[1]) || grid[0] < T::zero() {
        return Err(SubordinatorError::Grid("need ≥ 3 increasing non-negative nodes"));
    }
    let at0 = phi.eval(T::zero())?.as_f64();
    let vals = grid.iter().map(|&l| phi.eval(l).map(|v| v.as_f64())).collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = grid.iter().map(|g| g.as_f64()).collect();
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut mono = 0.0_f64;
    for w in vals.windows(2) {
        mono = mono.max(w[0] - w[1]);
    }
    let slopes: Vec<f64> = (0..xs.len() - 1).map(|i| (vals[i + 1] - vals[i]) / (xs[i + 1] - xs[i])).collect();
    let slope_scale = slopes.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut conc = 0.0_f64;
    for w in slopes.windows(2) {
        conc = conc.max(w[1] - w[0]);
    }
    let eps = 64.0 * T::epsilon().as_f64();
    let ok = at0 == 0.0 && mono <= eps * scale && conc <= eps * slope_scale.max(scale);
    Ok(BernsteinReport { ok, phi_at_zero: at0, monotone_violation: mono, concavity_violation: conc })
}
