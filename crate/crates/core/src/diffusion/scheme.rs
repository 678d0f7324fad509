//! Time stepping: Euler–Maruyama with reflection and the exact squared-Bessel
//! transition.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use super::drift::{check_drift_order, spot_grid, DriftField, Perturbation};
use super::DiffusionError;
use crate::specfun::drift_ratio;
use crate::subordinator::StableIndex;

/// Largest allowed drift displacement per step, in units of √dt.
pub const STABILITY_CAP: f64 = 3.0;
/// Relativistic drift table: nodes per unit of log x.
const TABLE_DENSITY: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reflection {
    /// |x|; exact for reflected Brownian motion.
    Absolute,
    /// max(x, 0); monotone in x, used for common-noise coupling.
    Projection,
}

impl Reflection {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Self::Absolute => x.abs(),
            Self::Projection => x.max(0.0),
        }
    }
}

/// ρ′_m/ρ_m as a cubic Hermite table in log x. Slopes come from the
/// Riccati equation r′ = 2m − (1−2α) r/x − r².
#[derive(Debug)]
struct RatioTable {
    alpha: f64,
    m: f64,
    u0: f64,
    h: f64,
    hi: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl RatioTable {
    fn new(alpha: f64, m: f64, lo: f64) -> Result<Self, DiffusionError> {
        let hi = (60.0 / (2.0 * m).sqrt()).max(10.0 * lo);
        let (u0, u1) = (lo.ln(), hi.ln());
        let n = ((u1 - u0) * TABLE_DENSITY).ceil().max(8.0) as usize;
        let h = (u1 - u0) / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        let mut slopes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = (u0 + i as f64 * h).exp();
            let r = drift_ratio(alpha, m, x)?;
            values.push(r);
            // d r / d(log x)
            slopes.push(x * (2.0 * m - r * r) - (1.0 - 2.0 * alpha) * r);
        }
        Ok(Self { alpha, m, u0, h, hi, values, slopes })
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        if x >= self.hi {
            return drift_ratio(self.alpha, self.m, x).unwrap_or(-(2.0 * self.m).sqrt());
        }
        let s = ((x.ln() - self.u0) / self.h).max(0.0);
        let i = (s as usize).min(self.values.len() - 2);
        let t = s - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h01 * self.values[i + 1] + self.h * (h10 * self.slopes[i] + h11 * self.slopes[i + 1])
    }
}

#[derive(Debug, Clone)]
enum Extra {
    None,
    Constant(f64),
    Table(Arc<RatioTable>),
    Perturbation(Perturbation),
}

/// A drift field prepared for repeated evaluation at x ∨ floor.
#[derive(Debug, Clone)]
pub struct CompiledDrift {
    k: f64,
    floor: f64,
    extra: Extra,
}

impl CompiledDrift {
    pub fn new(field: &DriftField, floor: f64) -> Result<Self, DiffusionError> {
        if !(floor > 0.0) {
            return Err(DiffusionError::Parameter { name: "x_floor", value: floor });
        }
        let alpha = field.alpha();
        let extra = match field {
            DriftField::Bessel { .. } => Extra::None,
            DriftField::RelativisticBessel { mass, .. } if mass.get() == 0.0 => Extra::None,
            // ρ_m = e^{−√(2m) x} at α = ½
            DriftField::RelativisticBessel { mass, .. } if alpha == 0.5 => Extra::Constant(-(2.0 * mass.get()).sqrt()),
            DriftField::RelativisticBessel { mass, .. } => Extra::Table(Arc::new(RatioTable::new(alpha, mass.get(), floor)?)),
            DriftField::Perturbed { f, .. } => Extra::Perturbation(f.clone()),
        };
        Ok(Self { k: 0.5 - alpha, floor, extra })
    }

    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        let x = x.max(self.floor);
        let base = self.k / x;
        match &self.extra {
            Extra::None => base,
            Extra::Constant(c) => base + c,
            Extra::Table(t) => base + t.eval(x),
            Extra::Perturbation(f) => base - f.eval(x),
        }
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }
}

/// Euler–Maruyama step X ← R(X + b(X ∨ √dt) dt + √dt ξ).
#[derive(Debug, Clone)]
pub struct EulerStepper {
    drift: CompiledDrift,
    dt: f64,
    sdt: f64,
    reflection: Reflection,
}

impl EulerStepper {
    /// Fails when dt · sup|b| over [√dt, 10³] exceeds [`STABILITY_CAP`]·√dt.
    pub fn new(field: &DriftField, dt: f64, reflection: Reflection) -> Result<Self, DiffusionError> {
        check_dt(dt)?;
        let sdt = dt.sqrt();
        let drift = CompiledDrift::new(field, sdt)?;
        let sup = spot_grid()
            .into_iter()
            .filter(|&x| x >= sdt)
            .chain([sdt])
            .map(|x| drift.at(x).abs())
            .fold(0.0_f64, f64::max);
        if sup * dt > STABILITY_CAP * sdt {
            return Err(DiffusionError::StepSize { dt, sup_drift: sup });
        }
        Ok(Self { drift, dt, sdt, reflection })
    }

    #[inline]
    pub fn step(&self, x: f64, xi: f64) -> f64 {
        self.reflection.apply(x + self.drift.at(x) * self.dt + self.sdt * xi)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Exact transition of the Bessel process of dimension δ = 2 − 2α over dt,
/// through the squared process: X²_{t+dt}/dt is non-central χ²_δ with
/// non-centrality X²_t/dt.
#[derive(Debug, Clone)]
pub struct ExactBesselStepper {
    delta: f64,
    dt: f64,
    sdt: f64,
    // χ²_{δ−1} for δ > 1
    extra: Option<Gamma<f64>>,
}

impl ExactBesselStepper {
    pub fn new(alpha: f64, dt: f64) -> Result<Self, DiffusionError> {
        StableIndex::new(alpha)?;
        check_dt(dt)?;
        let delta = 2.0 - 2.0 * alpha;
        let extra = if delta > 1.0 {
            Some(Gamma::new(0.5 * (delta - 1.0), 2.0).map_err(|_| DiffusionError::Parameter { name: "alpha", value: alpha })?)
        } else {
            None
        };
        Ok(Self { delta, dt, sdt: dt.sqrt(), extra })
    }

    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        if self.delta >= 1.0 {
            // (Z + √λ)² + χ²_{δ−1}
            let z: f64 = rng.sample(StandardNormal);
            let y = x + self.sdt * z;
            return match &self.extra {
                None => y.abs(),
                Some(g) => (y * y + self.dt * g.sample(rng)).sqrt(),
            };
        }
        // Poisson mixture of central χ²_{δ+2N}, N ~ Poisson(λ/2)
        let half_lambda = 0.5 * x * x / self.dt;
        let n = if half_lambda > 0.0 {
            Poisson::new(half_lambda).map(|p| p.sample(rng)).unwrap_or(0.0)
        } else {
            0.0
        };
        let shape = 0.5 * self.delta + n;
        let chi2 = Gamma::new(shape, 2.0).map(|g| g.sample(rng)).unwrap_or(0.0);
        (self.dt * chi2).sqrt()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

fn check_dt(dt: f64) -> Result<(), DiffusionError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(DiffusionError::Parameter { name: "dt", value: dt })
    }
}

/// Number of grid steps covering [0, T].
pub fn step_count(horizon: f64, dt: f64) -> Result<usize, DiffusionError> {
    check_dt(dt)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(DiffusionError::Parameter { name: "T", value: horizon });
    }
    let n = (horizon / dt).round();
    if n < 1.0 || n > u32::MAX as f64 {
        return Err(DiffusionError::Parameter { name: "T/dt", value: n });
    }
    Ok(n as usize)
}

fn check_start(x0: f64) -> Result<(), DiffusionError> {
    if x0 >= 0.0 && x0.is_finite() {
        Ok(())
    } else {
        Err(DiffusionError::Parameter { name: "x0", value: x0 })
    }
}

/// States X_{dt}, …, X_{n dt} of a path started at `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub dt: f64,
    pub x0: f64,
    pub values: Vec<f64>,
    pub seed: Option<u64>,
}

impl SamplePath {
    pub fn horizon(&self) -> f64 {
        self.values.len() as f64 * self.dt
    }

    /// State at grid index k, with index 0 the start.
    pub fn at(&self, k: usize) -> f64 {
        if k == 0 {
            self.x0
        } else {
            self.values[k - 1]
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Euler–Maruyama with |·| reflection, drift evaluated at x ∨ √dt.
pub fn simulate_reflected<R: Rng + ?Sized>(
    field: &DriftField,
    x0: f64,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> Result<SamplePath, DiffusionError> {
    check_start(x0)?;
    let n = step_count(horizon, dt)?;
    let stepper = EulerStepper::new(field, dt, Reflection::Absolute)?;
    let mut x = x0;
    let values = (0..n)
        .map(|_| {
            x = stepper.step(x, rng.sample(StandardNormal));
            x
        })
        .collect();
    Ok(SamplePath { dt, x0, values, seed: None })
}

/// Grid skeleton of the reflecting Bessel process of index −α, exact in law.
pub fn simulate_bessel_exact<R: Rng + ?Sized>(
    alpha: f64,
    x0: f64,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> Result<SamplePath, DiffusionError> {
    check_start(x0)?;
    let n = step_count(horizon, dt)?;
    let stepper = ExactBesselStepper::new(alpha, dt)?;
    let mut x = x0;
    let values = (0..n)
        .map(|_| {
            x = stepper.step(x, rng);
            x
        })
        .collect();
    Ok(SamplePath { dt, x0, values, seed: None })
}

/// Two paths driven by the same Gaussian increments.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPaths {
    pub lower: SamplePath,
    pub upper: SamplePath,
    /// Fraction of grid points with lower > upper.
    pub violation_fraction: f64,
}

/// Tolerance on lower ≤ upper, absorbing round-off between equal drifts.
pub const ORDER_TOLERANCE: f64 = 1e-9;

/// Common-noise coupling of two drift-ordered fields. Reflection is by
/// projection, which keeps each Euler step monotone in the state.
pub fn simulate_coupled<R: Rng + ?Sized>(
    lower: &DriftField,
    upper: &DriftField,
    x0: f64,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> Result<CoupledPaths, DiffusionError> {
    check_start(x0)?;
    check_drift_order(lower, upper)?;
    let n = step_count(horizon, dt)?;
    let sl = EulerStepper::new(lower, dt, Reflection::Projection)?;
    let su = EulerStepper::new(upper, dt, Reflection::Projection)?;
    let (mut a, mut b) = (x0, x0);
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut bad = 0usize;
    for _ in 0..n {
        let xi: f64 = rng.sample(StandardNormal);
        a = sl.step(a, xi);
        b = su.step(b, xi);
        if a > b + ORDER_TOLERANCE {
            bad += 1;
        }
        lo.push(a);
        hi.push(b);
    }
    Ok(CoupledPaths {
        lower: SamplePath { dt, x0, values: lo, seed: None },
        upper: SamplePath { dt, x0, values: hi, seed: None },
        violation_fraction: bad as f64 / n as f64,
    })
}

/// Fraction of grid points where `upper` is within ε of 0 but `lower` is
/// not, i.e. exceptions to mask(upper) ⊆ mask(lower).
pub fn zero_set_violation_fraction(lower: &SamplePath, upper: &SamplePath, epsilon: f64) -> f64 {
    let n = lower.values.len().min(upper.values.len());
    if n == 0 {
        return 0.0;
    }
    let bad = lower.values.iter().zip(&upper.values).filter(|(&a, &b)| b <= epsilon && a > epsilon).count();
    bad as f64 / n as f64
}
