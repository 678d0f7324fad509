//! Numerical checks: complete monotonicity, stochastic dominance and the
//! Lévy-density sandwich.

use super::{LevyDensity, SubordinatorError, SubordinatorSample};
use crate::Real;

/// KS one-sided confidence level used by [`stochastic_dominance_check`].
pub const DOMINANCE_LEVEL: f64 = 0.99;
pub const MIN_DOMINANCE_DRAWS: usize = 100;
pub const MAX_CM_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct CmReport {
    pub ok: bool,
    /// Most negative value of the sign-adjusted divided differences
    /// (zero when none is negative).
    pub worst_violation: f64,
    pub failing_order: Option<usize>,
    pub tolerance: f64,
}

/// Forward divided differences of orders `first..=last`, each multiplied by
/// `sign(k)`, compared against −tol.
fn signed_differences<T: Real, F: Fn(T) -> T>(
    f: F,
    grid: &[T],
    first: usize,
    last: usize,
    sign: impl Fn(usize) -> f64,
) -> Result<CmReport, SubordinatorError> {
    if last > MAX_CM_ORDER + 1 || grid.len() < last + 1 {
        return Err(SubordinatorError::Grid("grid too short for requested order"));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) || !(grid[0] > T::zero()) {
        return Err(SubordinatorError::Grid("grid must be strictly increasing and positive"));
    }
    let xs: Vec<f64> = grid.iter().map(|g| g.as_f64()).collect();
    let mut d: Vec<f64> = grid.iter().map(|&g| f(g).as_f64()).collect();
    let tol = 1e-9 * d[0].abs() + 1e-12;
    let mut worst = 0.0_f64;
    let mut failing = None;
    for k in 0..=last {
        if k > 0 {
            for i in 0..d.len() - 1 {
                d[i] = (d[i + 1] - d[i]) / (xs[i + k] - xs[i]);
            }
            d.pop();
        }
        if k < first {
            continue;
        }
        let s = sign(k);
        for &v in &d {
            let adj = s * v;
            if !adj.is_finite() || adj < -tol {
                failing.get_or_insert(k);
            }
            if adj < worst || adj.is_nan() {
                worst = if adj.is_nan() { f64::NEG_INFINITY } else { adj };
            }
        }
    }
    Ok(CmReport { ok: failing.is_none(), worst_violation: worst, failing_order: failing, tolerance: tol })
}

/// Complete monotonicity on a grid: (−1)^k Δ^k f ≥ −tol for k = 0..=order,
/// with tol = 1e−9 |f(grid₀)| + 1e−12.
pub fn complete_monotonicity_check<T: Real, F: Fn(T) -> T>(f: F, grid: &[T], order: usize) -> Result<CmReport, SubordinatorError> {
    if order > MAX_CM_ORDER {
        return Err(SubordinatorError::Grid("order above 6"));
    }
    signed_differences(f, grid, 0, order, |k| if k % 2 == 0 { 1.0 } else { -1.0 })
}

/// Bernstein-function check: f ≥ 0 and f′ completely monotone to `order`,
/// i.e. (−1)^{k−1} Δ^k f ≥ −tol for k = 1..=order+1.
pub fn bernstein_check<T: Real, F: Fn(T) -> T>(f: F, grid: &[T], order: usize) -> Result<CmReport, SubordinatorError> {
    if order > MAX_CM_ORDER {
        return Err(SubordinatorError::Grid("order above 6"));
    }
    let mut r = signed_differences(&f, grid, 1, order + 1, |k| if k % 2 == 1 { 1.0 } else { -1.0 })?;
    let lowest = f(grid[0]).as_f64();
    if lowest < -r.tolerance {
        r.ok = false;
        r.failing_order = Some(0);
        r.worst_violation = r.worst_violation.min(lowest);
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub ok: bool,
    /// sup_s (F_upper(s) − F_lower(s)); positive when the ECDFs cross the wrong way.
    pub max_cdf_crossing: f64,
    pub critical_value: f64,
}

/// One-sided two-sample KS test of `lower ≤ upper` in the usual stochastic
/// order. Fails when sup (F_upper − F_lower) exceeds the 99% critical value
/// √(−ln(0.01)/2) · √((n+m)/(nm)).
pub fn stochastic_dominance_check(lower: &SubordinatorSample, upper: &SubordinatorSample) -> Result<DominanceReport, SubordinatorError> {
    if lower.level != upper.level {
        return Err(SubordinatorError::LevelMismatch { lower: lower.level, upper: upper.level });
    }
    dominance_of_draws(&lower.draws, &upper.draws)
}

/// [`stochastic_dominance_check`] on bare draws.
pub fn dominance_of_draws(lower: &[f64], upper: &[f64]) -> Result<DominanceReport, SubordinatorError> {
    let (n, m) = (lower.len(), upper.len());
    if n < MIN_DOMINANCE_DRAWS || m < MIN_DOMINANCE_DRAWS {
        return Err(SubordinatorError::SampleSize { got: n.min(m), need: MIN_DOMINANCE_DRAWS });
    }
    if lower.iter().chain(upper).any(|v| v.is_nan()) {
        return Err(SubordinatorError::Grid("draws contain NaN"));
    }
    let mut a = lower.to_vec();
    let mut b = upper.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0_f64;
    while i < n || j < m {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < n && a[i] <= next {
            i += 1;
        }
        while j < m && b[j] <= next {
            j += 1;
        }
        sup = sup.max(j as f64 / m as f64 - i as f64 / n as f64);
    }
    let (nf, mf) = (n as f64, m as f64);
    let crit = (-(1.0 - DOMINANCE_LEVEL).ln() / 2.0).sqrt() * ((nf + mf) / (nf * mf)).sqrt();
    Ok(DominanceReport { ok: sup <= crit, max_cdf_crossing: sup, critical_value: crit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub ok: bool,
    /// Largest amount by which the lower bound is violated.
    pub max_lower_violation: f64,
    /// Largest amount by which the upper bound is violated.
    pub max_upper_violation: f64,
}

/// Closed-form sandwich 0 ≤ ν^(α)(t) − ν^(α,m)(t) ≤ c_α(1 − e^{−mt}) t^{−1−α}.
pub fn levy_sandwich_check<T: Real>(
    nu_m: &LevyDensity<T>,
    nu_alpha: &LevyDensity<T>,
    t_grid: &[T],
) -> Result<SandwichReport, SubordinatorError> {
    let (alpha, mass) = match (nu_m, nu_alpha) {
        (LevyDensity::RelativisticStable { alpha, mass }, LevyDensity::Stable { alpha: a2 }) if alpha == a2 => (*alpha, *mass),
        _ => return Err(SubordinatorError::Grid("expects a relativistic and a stable density of equal index")),
    };
    let c = alpha.c();
    let mut lo = 0.0_f64;
    let mut hi = 0.0_f64;
    for &t in t_grid {
        let (a, b) = (nu_alpha.eval(t)?, nu_m.eval(t)?);
        let gap = (a - b).as_f64();
        let bound = (-c * t.powf(-T::one() - alpha.get()) * (-mass.get() * t).exp_m1()).as_f64();
        let slack = 16.0 * T::epsilon().as_f64() * a.as_f64().abs();
        lo = lo.max(-gap - slack);
        hi = hi.max(gap - bound - slack);
    }
    Ok(SandwichReport { ok: lo <= 0.0 && hi <= 0.0, max_lower_violation: lo.max(0.0), max_upper_violation: hi.max(0.0) })
}

/// Tail sandwich lower ≤ middle ≤ upper pointwise, each comparison allowed
/// to fail by the matching entry of `band`.
pub fn tail_sandwich_check(lower: &[f64], middle: &[f64], upper: &[f64], band: &[f64]) -> Result<SandwichReport, SubordinatorError> {
    let n = middle.len();
    if lower.len() != n || upper.len() != n || band.len() != n {
        return Err(SubordinatorError::Grid("tail arrays differ in length"));
    }
    let mut lo = 0.0_f64;
    let mut hi = 0.0_f64;
    for i in 0..n {
        lo = lo.max(lower[i] - middle[i] - band[i]);
        hi = hi.max(middle[i] - upper[i] - band[i]);
    }
    Ok(SandwichReport { ok: lo <= 0.0 && hi <= 0.0, max_lower_violation: lo, max_upper_violation: hi })
}
