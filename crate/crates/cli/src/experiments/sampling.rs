//! Closed-form subordinator samplers and the dominance test.

use ilt_core::subordinator::{dominance_of_draws, draw_many, LaplaceExponent};

use super::{alpha_or, mass_or, Outcome};
use crate::output::read_draws;
use crate::{Check, CliError, ExperimentConfig, Table};

/// Largest |z|-score accepted for an empirical Laplace transform.
pub const SAMPLE_Z: f64 = 3.0;

fn laplace_mean(draws: &[f64], l: f64) -> (f64, f64) {
    let n = draws.len() as f64;
    let mean = draws.iter().map(|s| (-l * s).exp()).sum::<f64>() / n;
    let var = draws.iter().map(|s| ((-l * s).exp() - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn sample(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let alpha = alpha_or(cfg, 0.5);
    let m = mass_or(cfg, alpha, 1.0)?;
    let t = cfg.t.unwrap_or(1.0);
    let n = cfg.n_paths.unwrap_or(100_000);
    if n < 2 {
        return Err(CliError::Config("sample needs n_paths >= 2".into()));
    }
    let lambdas = cfg.lambda_grid.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0, 5.0]);
    let runs = [
        ("stable", 0.0, cfg.master_seed),
        ("relativistic", m, cfg.master_seed.wrapping_add(1)),
    ];
    let mut table = Table::new("sample", &["process", "lambda", "empirical", "closed_form", "stderr", "z"]);
    let mut checks = Vec::new();
    for (name, mass, seed) in runs {
        let s = draw_many(alpha, mass, t, n, seed, cfg.workers)?;
        let phi = LaplaceExponent::relativistic(alpha, mass)?;
        for &l in &lambdas {
            let (mean, se) = laplace_mean(&s.draws, l);
            let exact = (-t * phi.eval(l)?).exp();
            let z = (mean - exact) / se;
            table.push(vec![name.into(), l.into(), mean.into(), exact.into(), se.into(), z.into()]);
            checks.push(Check::within(format!("z_{name}_{l}"), z, -SAMPLE_Z, SAMPLE_Z));
        }
    }
    Ok((vec![table], checks))
}

pub fn dominance(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut checks = Vec::new();
    let (lower, upper) = match (&cfg.lower_file, &cfg.upper_file) {
        (Some(a), Some(b)) => (read_draws(a)?, read_draws(b)?),
        (None, None) => {
            let alpha = alpha_or(cfg, 0.5);
            let m = mass_or(cfg, alpha, 1.0)?;
            let t = cfg.t.unwrap_or(1.0);
            let n = cfg.n_paths.unwrap_or(10_000);
            checks.push(Check::info("m", m));
            let lo = draw_many(alpha, m, t, n, cfg.master_seed, cfg.workers)?;
            let hi = draw_many(alpha, 0.0, t, n, cfg.master_seed.wrapping_add(1), cfg.workers)?;
            (lo.draws, hi.draws)
        }
        _ => return Err(CliError::Config("dominance needs both lower_file and upper_file, or neither".into())),
    };
    let rep = dominance_of_draws(&lower, &upper)?;
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s
    };
    let (sl, su) = (sorted(&lower), sorted(&upper));
    let quantile = |s: &[f64], q: f64| s[((q * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
    let mut table = Table::new("dominance", &["quantile", "lower", "upper"]);
    for k in 1..100 {
        let q = k as f64 / 100.0;
        table.push(vec![q.into(), quantile(&sl, q).into(), quantile(&su, q).into()]);
    }
    checks.push(Check::flag("dominance", rep.max_cdf_crossing, format!("<= {:e}", rep.critical_value), rep.ok));
    checks.push(Check::info("n_lower", lower.len() as f64));
    checks.push(Check::info("n_upper", upper.len() as f64));
    Ok((vec![table], checks))
}
