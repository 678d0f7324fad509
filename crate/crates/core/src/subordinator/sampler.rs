//! Exact samplers for S_t of the stable and relativistic stable subordinators.

use rand::Rng;
use rand_distr::{Exp1, Open01};

use super::{Mass, StableIndex, SubordinatorError};
use crate::rng::{chunks, parallel_tasks};

/// Largest expected number of rejection rounds per draw.
pub const REJECTION_BUDGET: f64 = 1e6;
const DRAWS_PER_TASK: usize = 4096;

/// Draws of S at local-time level `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorSample {
    pub level: f64,
    pub draws: Vec<f64>,
    pub seed: Option<u64>,
}

/// Positive α-stable variable with E e^{−λS} = e^{−λ^α} (Kanter's representation).
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = std::f64::consts::PI * rng.sample::<f64, _>(Open01);
    let w: f64 = rng.sample(Exp1);
    let s1 = (alpha * u).sin() / u.sin().powf(alpha.recip());
    let s2 = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    s1 * s2
}

/// S_t of the stable subordinator, E e^{−λ S_t} = e^{−t c_α λ^α}.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    alpha: f64,
    scale: f64,
}

impl StableSampler {
    pub fn new(alpha: f64, t: f64) -> Result<Self, SubordinatorError> {
        let a = StableIndex::new(alpha)?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(SubordinatorError::Negative(t));
        }
        Ok(Self { alpha, scale: (a.c() * t).powf(alpha.recip()) })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.scale * sample_positive_stable(self.alpha, rng)
    }
}

/// S_t of the relativistic stable subordinator by rejection from the
/// stable one: accept a stable draw s with probability e^{−ms}.
#[derive(Debug, Clone, Copy)]
pub struct RelativisticSampler {
    stable: StableSampler,
    mass: f64,
}

impl RelativisticSampler {
    pub fn new(alpha: f64, m: f64, t: f64) -> Result<Self, SubordinatorError> {
        let stable = StableSampler::new(alpha, t)?;
        let mass = Mass::new(m)?.get();
        // Acceptance probability is E e^{−m S_t} = e^{−t c_α m^α}.
        let log_rounds = t * StableIndex::new(alpha)?.c() * mass.powf(alpha);
        if log_rounds > REJECTION_BUDGET.ln() {
            return Err(SubordinatorError::Budget { expected_rounds: log_rounds.exp(), budget: REJECTION_BUDGET });
        }
        Ok(Self { stable, mass })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.mass == 0.0 {
            return self.stable.sample(rng);
        }
        loop {
            let s = self.stable.sample(rng);
            let u: f64 = rng.sample(Open01);
            if u <= (-self.mass * s).exp() {
                return s;
            }
        }
    }
}

pub fn sample_stable<R: Rng + ?Sized>(alpha: f64, t: f64, rng: &mut R) -> Result<f64, SubordinatorError> {
    Ok(StableSampler::new(alpha, t)?.sample(rng))
}

pub fn sample_relativistic<R: Rng + ?Sized>(alpha: f64, m: f64, t: f64, rng: &mut R) -> Result<f64, SubordinatorError> {
    Ok(RelativisticSampler::new(alpha, m, t)?.sample(rng))
}

/// `n` draws of S_t for mass `m` (0 gives the stable subordinator), split
/// into fixed-size tasks on independent substreams of `seed`.
pub fn draw_many(alpha: f64, m: f64, t: f64, n: usize, seed: u64, workers: usize) -> Result<SubordinatorSample, SubordinatorError> {
    let sampler = RelativisticSampler::new(alpha, m, t)?;
    let parts = chunks(n, DRAWS_PER_TASK);
    let blocks = parallel_tasks(parts.len(), workers, seed, |i, rng| {
        (0..parts[i].1).map(|_| sampler.sample(rng)).collect::<Vec<f64>>()
    })
    .map_err(|e| SubordinatorError::Exec(e.to_string()))?;
    Ok(SubordinatorSample { level: t, draws: blocks.concat(), seed: Some(seed) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_substream;

    fn laplace_mean(draws: &[f64], l: f64) -> (f64, f64) {
        let n = draws.len() as f64;
        let v: Vec<f64> = draws.iter().map(|s| (-l * s).exp()).collect();
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn unit_stable_laplace_transform() {
        let mut rng = derive_substream(1, 0);
        let draws: Vec<f64> = (0..40_000).map(|_| sample_positive_stable(0.5, &mut rng)).collect();
        for &l in &[0.5, 1.0, 3.0] {
            let (m, se) = laplace_mean(&draws, l);
            assert!((m - (-f64::sqrt(l)).exp()).abs() < 4.0 * se);
        }
    }

    // α = 1/2 gives the Lévy law: E e^{−λS} = e^{−k√λ} means S = k²/(2Z²)
    // with Z standard normal. Compared through the median.
    #[test]
    fn half_stable_median() {
        let t = 2.0;
        let c = 0.5 / std::f64::consts::PI.sqrt();
        let mut rng = derive_substream(2, 0);
        let mut d: Vec<f64> = (0..20_001).map(|_| sample_stable(0.5, t, &mut rng).unwrap()).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // median of |Z|
        let k = c * t;
        let z = 0.674_489_750_196_082;
        let median = k * k / (2.0 * z * z);
        assert!(((d[10_000] - median) / median).abs() < 0.03);
    }

    #[test]
    fn relativistic_budget() {
        assert!(matches!(RelativisticSampler::new(0.5, 1e6, 1.0), Err(SubordinatorError::Budget { .. })));
        assert!(RelativisticSampler::new(0.5, 1.0, 1.0).is_ok());
    }

    #[test]
    fn draw_many_is_worker_independent() {
        let a = draw_many(0.4, 1.0, 1.0, 10_000, 5, 1).unwrap();
        let b = draw_many(0.4, 1.0, 1.0, 10_000, 5, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.draws.len(), 10_000);
    }
}
