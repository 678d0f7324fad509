//! Estimators on simulated output and the analytic checks that accompany
//! them.

use super::DiffusionError;
use super::localtime::LocalTimeEstimate;
use crate::quad::{Integrator, QuadError};
use crate::specfun::{bessel_transition_density, rho_m};
use crate::subordinator::{Mass, StableIndex, SubordinatorSample};

pub const MIN_LAPLACE_DRAWS: usize = 1000;
pub const MIN_TAIL_EXCURSIONS: usize = 50;

/// φ̂(λ)/φ̂(λ_ref) with delta-method standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceRatio {
    pub lambdas: Vec<f64>,
    pub ratios: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// φ̂(λ)/φ̂(λ_ref) with φ̂(λ) = −log(mean e^{−λS})/t. Censored draws (+∞)
/// contribute e^{−λS} = 0.
pub fn empirical_laplace_ratio(sample: &SubordinatorSample, lambdas: &[f64], lambda_ref: f64) -> Result<Vec<f64>, DiffusionError> {
    Ok(laplace_ratio_with_error(sample, lambdas, lambda_ref)?.ratios)
}

pub fn laplace_ratio_with_error(sample: &SubordinatorSample, lambdas: &[f64], lambda_ref: f64) -> Result<LaplaceRatio, DiffusionError> {
    let n = sample.draws.len();
    if n < MIN_LAPLACE_DRAWS {
        return Err(DiffusionError::SampleSize { got: n, need: MIN_LAPLACE_DRAWS });
    }
    for &l in lambdas.iter().chain([&lambda_ref]) {
        if !(l > 0.0 && l.is_finite()) {
            return Err(DiffusionError::Parameter { name: "lambda", value: l });
        }
    }
    if sample.draws.iter().any(|s| s.is_nan() || *s < 0.0) {
        return Err(DiffusionError::Degenerate("draws must be non-negative"));
    }
    let nf = n as f64;
    let mean = |l: f64| sample.draws.iter().map(|&s| (-l * s).exp()).sum::<f64>() / nf;
    let m_ref = mean(lambda_ref);
    let log_ref = m_ref.ln();
    if !(m_ref > 0.0) || log_ref == 0.0 {
        return Err(DiffusionError::Degenerate("mean of exp(-lambda_ref S) is 0 or 1"));
    }
    let mut ratios = Vec::with_capacity(lambdas.len());
    let mut stderr = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let m = mean(l);
        if !(m > 0.0) {
            return Err(DiffusionError::Degenerate("mean of exp(-lambda S) underflows"));
        }
        let log_m = m.ln();
        // level t cancels in the ratio
        ratios.push(log_m / log_ref);
        let (ga, gb) = (1.0 / (m * log_ref), -log_m / (m_ref * log_ref * log_ref));
        let var = sample
            .draws
            .iter()
            .map(|&s| {
                let d = ga * ((-l * s).exp() - m) + gb * ((-lambda_ref * s).exp() - m_ref);
                d * d
            })
            .sum::<f64>()
            / (nf - 1.0);
        stderr.push((var / nf).sqrt());
    }
    Ok(LaplaceRatio { lambdas: lambdas.to_vec(), ratios, stderr })
}

/// ν̂((s, ∞)) per unit local time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionTail {
    pub s_grid: Vec<f64>,
    pub tail: Vec<f64>,
    /// Excursions longer than s.
    pub counts: Vec<usize>,
    /// Local time accumulated over the observation window.
    pub local_time: f64,
}

impl ExcursionTail {
    /// Poisson standard error of each tail value.
    pub fn stderr(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| (c as f64).sqrt() / self.local_time).collect()
    }
}

/// Counts excursions above ε longer than s that start in the window
/// [0, T − max s], and divides by the local time of that window. Using the
/// window removes the right-censoring bias of excursions cut by T, and a
/// single window for all s keeps the estimate nonincreasing in s.
pub fn excursion_tail_estimate(estimates: &[LocalTimeEstimate], s_grid: &[f64]) -> Result<ExcursionTail, DiffusionError> {
    if s_grid.is_empty() || s_grid.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(DiffusionError::Parameter { name: "s", value: s_grid.iter().copied().fold(f64::NAN, f64::min) });
    }
    let s_max = s_grid.iter().copied().fold(0.0, f64::max);
    let s_min = s_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut counts = vec![0usize; s_grid.len()];
    let mut local = 0.0;
    for e in estimates {
        let tail_steps = (s_max / e.dt).ceil() as usize;
        if tail_steps >= e.n_steps {
            return Err(DiffusionError::Parameter { name: "s", value: s_max });
        }
        if (e.excursion_floor as f64) > s_min / e.dt {
            return Err(DiffusionError::Parameter { name: "s", value: s_min });
        }
        let window = (e.n_steps - tail_steps) as u32;
        local += e.gauge * e.completions.partition_point(|&c| c <= window) as f64;
        for x in e.excursions.iter().filter(|x| x.start <= window) {
            let d = x.len as f64 * e.dt;
            for (c, &s) in counts.iter_mut().zip(s_grid) {
                if d > s {
                    *c += 1;
                }
            }
        }
    }
    if !(local > 0.0) {
        return Err(DiffusionError::Degenerate("no local time in the observation window"));
    }
    let at_min = s_grid.iter().zip(&counts).filter(|(&s, _)| s == s_min).map(|(_, &c)| c).next().unwrap_or(0);
    if at_min < MIN_TAIL_EXCURSIONS {
        return Err(DiffusionError::InsufficientExcursions { got: at_min, need: MIN_TAIL_EXCURSIONS });
    }
    let tail = counts.iter().map(|&c| c as f64 / local).collect();
    Ok(ExcursionTail { s_grid: s_grid.to_vec(), tail, counts, local_time: local })
}

const FD_STEP: f64 = 1e-4;

/// max over the grid of |½ρ″ + ((1−2α)/2x)ρ′ − mρ| / (mρ), derivatives by
/// five-point central differences with h = 1e-4.
pub fn rho_ode_residual(alpha: f64, m: f64, x_grid: &[f64]) -> Result<f64, DiffusionError> {
    StableIndex::new(alpha)?;
    Mass::new(m)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    let h = FD_STEP;
    let mut worst = 0.0_f64;
    for &x in x_grid {
        if !(x > 2.0 * h && x.is_finite()) {
            return Err(DiffusionError::Parameter { name: "x", value: x });
        }
        let f = |k: f64| rho_m(alpha, m, x + k * h);
        let (fm2, fm1, f0, fp1, fp2) = (f(-2.0)?, f(-1.0)?, f(0.0)?, f(1.0)?, f(2.0)?);
        let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
        let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
        let r = (0.5 * d2 + (1.0 - 2.0 * alpha) / (2.0 * x) * d1 - m * f0).abs() / (m * f0);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Starting points scanned for the supremum over x.
fn girsanov_start_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend((0..31).map(|i| 1e-3 * 4000f64.powf(i as f64 / 30.0)));
    g
}

/// Upper bound for sup_x E_x ∫₀^T f(X_t)² dt with f = c1 (1 ∧ x)^{2α−1} and
/// X the Bessel process of index −α.
///
/// For α ≥ ½, f ≤ c1 and the bound is c1² T. Otherwise it is
/// c1² (T + sup_x ∫₀¹ ∫₀^T p(t, x, y) y^{4α−2} 2y^{1−2α} dt dy),
/// with p the transition density against the speed measure; the supremum
/// is taken over a grid of starting points x ∈ {0} ∪ [1e-3, 4].
/// Returns +∞ if the quadrature diverges.
pub fn girsanov_condition_bound(alpha: f64, c1: f64, horizon: f64) -> Result<f64, DiffusionError> {
    StableIndex::new(alpha)?;
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(DiffusionError::Parameter { name: "c1", value: c1 });
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(DiffusionError::Parameter { name: "T", value: horizon });
    }
    let c2 = c1 * c1;
    if alpha >= 0.5 {
        return Ok(c2 * horizon);
    }
    let mut sup = 0.0_f64;
    for x in girsanov_start_grid() {
        match occupation_integral(alpha, x, horizon, 1e-8) {
            Ok(v) => sup = sup.max(v),
            Err(DiffusionError::Quad(QuadError::NonFinite(_))) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(c2 * (horizon + sup))
}

/// ∫₀¹ 2y^{2α−1} ∫₀^T p(t, x, y) dt dy, by y = v^{1/(2α)} and t = T w².
pub fn occupation_integral(alpha: f64, x: f64, horizon: f64, rel_tol: f64) -> Result<f64, DiffusionError> {
    let q = Integrator { rel_tol, abs_tol: 1e-14, ..Integrator::default() };
    let mut failure = None;
    let mut green = |y: f64| -> f64 {
        let r = q.finite(
            |w: f64| {
                if w == 0.0 {
                    return 0.0;
                }
                let t = horizon * w * w;
                bessel_transition_density(alpha, t, x, y).unwrap_or(f64::NAN) * 2.0 * horizon * w
            },
            0.0,
            1.0,
        );
        match r {
            Ok(e) => e.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let inv = 1.0 / (2.0 * alpha);
    let split = if x > 0.0 && x < 1.0 { x.powf(2.0 * alpha) } else { 0.5 };
    let mut total = 0.0;
    for (a, b) in [(0.0, split), (split, 1.0)] {
        total += q.finite(|v: f64| green(v.powf(inv)), a, b)?.value;
    }
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(total / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::localtime::Excursion;

    #[test]
    fn laplace_ratio_is_one_at_reference() {
        let draws: Vec<f64> = (0..2000).map(|i| 0.001 * i as f64).collect();
        let s = SubordinatorSample { level: 1.0, draws, seed: None };
        let r = empirical_laplace_ratio(&s, &[0.5, 1.0, 2.0], 1.0).unwrap();
        assert_eq!(r[1], 1.0);
        assert!(r[0] < 1.0 && r[2] > 1.0);
    }

    // Scaling the local-time gauge by κ rescales S's level, not the draws, so
    // the ratio depends only on the draws.
    #[test]
    fn laplace_ratio_of_exponential_sample() {
        // deterministic S ≡ 2: φ̂(λ)/φ̂(1) = λ
        let s = SubordinatorSample { level: 3.0, draws: vec![2.0; 1000], seed: None };
        let r = empirical_laplace_ratio(&s, &[0.5, 4.0], 1.0).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-14 && (r[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn laplace_ratio_errors() {
        let small = SubordinatorSample { level: 1.0, draws: vec![1.0; 10], seed: None };
        assert!(matches!(empirical_laplace_ratio(&small, &[1.0], 1.0), Err(DiffusionError::SampleSize { .. })));
        let inf = SubordinatorSample { level: 1.0, draws: vec![f64::INFINITY; 1000], seed: None };
        assert!(matches!(empirical_laplace_ratio(&inf, &[1.0], 1.0), Err(DiffusionError::Degenerate(_))));
    }

    fn synthetic(lens: &[u32], n_steps: usize) -> LocalTimeEstimate {
        let mut excursions = Vec::new();
        let mut completions = Vec::new();
        let mut k = 1u32;
        for &l in lens {
            excursions.push(Excursion { start: k, len: l, complete: true });
            k += l;
            completions.push(k);
            k += 1;
        }
        LocalTimeEstimate {
            epsilon: 0.1,
            lower: 0.1 / 3.0,
            gauge: 1.0,
            dt: 1.0,
            n_steps,
            completions,
            excursions,
            excursion_floor: 0,
            zero_set_mask: vec![],
        }
    }

    #[test]
    fn tail_counts_in_window() {
        let lens: Vec<u32> = (0..100).map(|i| 1 + (i % 10)).collect();
        let total: u32 = lens.iter().map(|l| l + 1).sum();
        let e = synthetic(&lens, total as usize + 20);
        let t = excursion_tail_estimate(&[e], &[0.5, 5.5, 10.5]).unwrap();
        assert_eq!(t.counts, vec![100, 50, 0]);
        assert_eq!(t.local_time, 100.0);
        assert!(t.tail.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn tail_needs_enough_excursions() {
        let e = synthetic(&[3; 20], 200);
        assert!(matches!(excursion_tail_estimate(&[e], &[1.0]), Err(DiffusionError::InsufficientExcursions { got: 20, .. })));
    }

    #[test]
    fn rho_residual_examples() {
        let grid: Vec<f64> = (0..50).map(|i| 0.05 + 0.2 * i as f64).collect();
        assert!(rho_ode_residual(0.5, 1.0, &grid).unwrap() <= 1e-6);
        assert!(rho_ode_residual(0.25, 1.0, &grid).unwrap() <= 1e-5);
        assert_eq!(rho_ode_residual(0.25, 0.0, &grid).unwrap(), 0.0);
    }

    #[test]
    fn girsanov_bound_examples() {
        assert_eq!(girsanov_condition_bound(0.5, 2.0, 3.0).unwrap(), 12.0);
        assert_eq!(girsanov_condition_bound(0.75, 1.0, 1.0).unwrap(), 1.0);
        let b = girsanov_condition_bound(0.25, 1.0, 1.0).unwrap();
        assert!(b.is_finite() && b > 1.0);
        let small = girsanov_condition_bound(0.25, 1.0, 1e-4).unwrap();
        assert!(small < 0.05 * b);
    }
}
