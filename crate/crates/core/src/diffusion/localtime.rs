//! Local time at 0 from ε-downcrossing counts, and its right inverse.

use rand::Rng;
use rand_distr::StandardNormal;

use super::DiffusionError;
use crate::rng::{chunks, parallel_tasks};

/// ε must be at least this many √dt.
pub const RESOLUTION_FACTOR: f64 = 3.0;

/// A downcrossing runs from ε down to `lower` = ε/3; each completed one adds
/// `gauge` to the local time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub epsilon: f64,
    pub lower: f64,
    pub gauge: f64,
}

impl Band {
    /// Gauge ε − ε/3: the band width, which makes gauge · D converge to the
    /// semimartingale local time of reflected Brownian motion.
    pub fn new(epsilon: f64) -> Result<Self, DiffusionError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(DiffusionError::Parameter { name: "epsilon", value: epsilon });
        }
        let lower = epsilon / 3.0;
        Ok(Self { epsilon, lower, gauge: epsilon - lower })
    }

    pub fn with_gauge(self, gauge: f64) -> Result<Self, DiffusionError> {
        if !(gauge > 0.0 && gauge.is_finite()) {
            return Err(DiffusionError::Parameter { name: "gauge", value: gauge });
        }
        Ok(Self { gauge, ..self })
    }

    pub fn check_resolution(&self, dt: f64) -> Result<(), DiffusionError> {
        let need = RESOLUTION_FACTOR * dt.sqrt();
        if self.epsilon < need * (1.0 - 1e-12) {
            return Err(DiffusionError::Resolution { epsilon: self.epsilon, need });
        }
        Ok(())
    }
}

/// A maximal run of grid points above ε that follows a visit to [0, ε].
/// Steps `start .. start + len` are above ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Excursion {
    pub start: u32,
    pub len: u32,
    /// False when the path was still above ε at the horizon.
    pub complete: bool,
}

/// Streaming downcrossing and excursion counter fed one grid value at a time.
#[derive(Debug, Clone)]
pub struct DowncrossingCounter {
    band: Band,
    step: u32,
    armed: bool,
    seen_low: bool,
    above_since: Option<u32>,
    min_excursion: u32,
    record_mask: bool,
    completions: Vec<u32>,
    excursions: Vec<Excursion>,
    mask: Vec<bool>,
}

impl DowncrossingCounter {
    /// `min_excursion` drops shorter excursions from the record (they still
    /// separate completions as usual).
    pub fn new(band: Band, x0: f64, min_excursion: u32, record_mask: bool) -> Self {
        Self {
            band,
            step: 0,
            armed: x0 >= band.epsilon,
            seen_low: x0 <= band.epsilon,
            above_since: None,
            min_excursion: min_excursion.max(1),
            record_mask,
            completions: Vec::new(),
            excursions: Vec::new(),
            mask: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.step += 1;
        let k = self.step;
        let eps = self.band.epsilon;
        if x >= eps {
            self.armed = true;
        } else if x <= self.band.lower && self.armed {
            self.armed = false;
            self.completions.push(k);
        }
        if x > eps {
            if self.above_since.is_none() && self.seen_low {
                self.above_since = Some(k);
            }
        } else {
            self.seen_low = true;
            if let Some(s) = self.above_since.take() {
                let len = k - s;
                if len >= self.min_excursion {
                    self.excursions.push(Excursion { start: s, len, complete: true });
                }
            }
        }
        if self.record_mask {
            self.mask.push(x <= eps);
        }
    }

    pub fn count(&self) -> usize {
        self.completions.len()
    }

    pub fn steps(&self) -> u32 {
        self.step
    }

    pub fn finish(mut self, dt: f64) -> LocalTimeEstimate {
        if let Some(s) = self.above_since.take() {
            let len = self.step - s + 1;
            if len >= self.min_excursion {
                self.excursions.push(Excursion { start: s, len, complete: false });
            }
        }
        LocalTimeEstimate {
            epsilon: self.band.epsilon,
            lower: self.band.lower,
            gauge: self.band.gauge,
            dt,
            n_steps: self.step as usize,
            completions: self.completions,
            excursions: self.excursions,
            excursion_floor: self.min_excursion,
            zero_set_mask: self.mask,
        }
    }
}

/// L(t) = gauge · (number of downcrossings completed by t).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeEstimate {
    pub epsilon: f64,
    pub lower: f64,
    pub gauge: f64,
    pub dt: f64,
    pub n_steps: usize,
    /// Grid indices at which downcrossings complete, increasing.
    pub completions: Vec<u32>,
    pub excursions: Vec<Excursion>,
    /// Excursions shorter than this many steps were not recorded.
    pub excursion_floor: u32,
    /// Path value ≤ ε at grid index k + 1; empty for streamed runs.
    pub zero_set_mask: Vec<bool>,
}

impl LocalTimeEstimate {
    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// L(T).
    pub fn total(&self) -> f64 {
        self.gauge * self.completions.len() as f64
    }

    /// L after grid index `k`.
    pub fn at_step(&self, k: usize) -> f64 {
        self.gauge * self.completions.partition_point(|&c| (c as usize) <= k) as f64
    }

    /// L on the whole grid, index 0 being time 0.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_steps + 1);
        let mut j = 0;
        for k in 0..=self.n_steps {
            while j < self.completions.len() && self.completions[j] as usize <= k {
                j += 1;
            }
            out.push(self.gauge * j as f64);
        }
        out
    }

    /// S(t) = inf{s : L(s) > t}, or None when L(T) ≤ t.
    pub fn inverse(&self, level: f64) -> Option<f64> {
        if !(level >= 0.0) {
            return None;
        }
        let idx = (level / self.gauge).floor();
        if idx >= self.completions.len() as f64 {
            return None;
        }
        Some(self.completions[idx as usize] as f64 * self.dt)
    }

    /// [`Self::inverse`] with +∞ for levels beyond the horizon.
    pub fn inverse_or_censored(&self, level: f64) -> f64 {
        self.inverse(level).unwrap_or(f64::INFINITY)
    }
}

/// Downcrossing local time of a stored path. Requires ε ≥ 3√dt.
pub fn local_time(path: &super::SamplePath, band: Band) -> Result<LocalTimeEstimate, DiffusionError> {
    band.check_resolution(path.dt)?;
    let mut c = DowncrossingCounter::new(band, path.x0, 1, true);
    for &x in &path.values {
        c.push(x);
    }
    Ok(c.finish(path.dt))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseLocalTime {
    pub levels: Vec<f64>,
    pub times: Vec<f64>,
}

/// S at each level; every level must lie in [0, L(T)).
pub fn inverse_local_time(l: &LocalTimeEstimate, levels: &[f64]) -> Result<InverseLocalTime, DiffusionError> {
    let total = l.total();
    let times = levels
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(DiffusionError::Parameter { name: "level", value: t });
            }
            l.inverse(t).ok_or(DiffusionError::LevelExceeded { level: t, available: total })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InverseLocalTime { levels: levels.to_vec(), times })
}

/// Gauges fitted on reflected Brownian motion, where E L_T = √(2T/π).
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCalibration {
    pub epsilons: Vec<f64>,
    pub mean_downcrossings: Vec<f64>,
    /// √(2T/π) / E D_T(ε).
    pub gauges: Vec<f64>,
}

impl GaugeCalibration {
    /// Band at the first calibrated ε with its fitted gauge.
    pub fn band(&self) -> Result<Band, DiffusionError> {
        Band::new(self.epsilons[0])?.with_gauge(self.gauges[0])
    }
}

/// Calibrates the gauge over ε ∈ {ε₀, 2ε₀, 4ε₀} from `n_paths` reflected
/// Brownian paths started at 0.
pub fn calibrate_gauge(
    epsilon0: f64,
    dt: f64,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    workers: usize,
) -> Result<GaugeCalibration, DiffusionError> {
    let epsilons = vec![epsilon0, 2.0 * epsilon0, 4.0 * epsilon0];
    let bands = epsilons.iter().map(|&e| Band::new(e)).collect::<Result<Vec<_>, _>>()?;
    bands[0].check_resolution(dt)?;
    let n = super::scheme::step_count(horizon, dt)?;
    if n_paths == 0 {
        return Err(DiffusionError::SampleSize { got: 0, need: 1 });
    }
    let sdt = dt.sqrt();
    let parts = chunks(n_paths, 64);
    let counts = parallel_tasks(parts.len(), workers, seed, |i, rng| {
        let mut tot = [0u64; 3];
        for _ in 0..parts[i].1 {
            let mut cs: Vec<DowncrossingCounter> = bands.iter().map(|&b| DowncrossingCounter::new(b, 0.0, u32::MAX, false)).collect();
            let mut x = 0.0_f64;
            for _ in 0..n {
                x = (x + sdt * rng.sample::<f64, _>(StandardNormal)).abs();
                for c in cs.iter_mut() {
                    c.push(x);
                }
            }
            for (t, c) in tot.iter_mut().zip(&cs) {
                *t += c.count() as u64;
            }
        }
        tot
    })?;
    let expected = (2.0 * horizon / std::f64::consts::PI).sqrt();
    let mut mean = vec![0.0; 3];
    for c in &counts {
        for j in 0..3 {
            mean[j] += c[j] as f64;
        }
    }
    for m in mean.iter_mut() {
        *m /= n_paths as f64;
    }
    if mean.contains(&0.0) {
        return Err(DiffusionError::Degenerate("no downcrossings in calibration"));
    }
    let gauges = mean.iter().map(|&m| expected / m).collect();
    Ok(GaugeCalibration { epsilons, mean_downcrossings: mean, gauges })
}
