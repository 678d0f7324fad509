//! Path simulation experiments: single processes, the coupled sandwich,
//! Laplace-ratio fits and excursion tails.

use ilt_core::diffusion::{
    excursion_tail_estimate, laplace_ratio_with_error, local_time, run_coupled, simulate_bessel_exact, simulate_reflected,
    step_count, CoupledConfig, DriftField, ExcursionTail, InverseLocalTime, LaplaceProcess, LaplaceRunConfig, Perturbation,
};
use ilt_core::rng::parallel_tasks;
use ilt_core::subordinator::{dominance_of_draws, tail_sandwich_check};

use super::{alpha_or, band_for, check_budget, mass_or, Outcome};
use crate::{Check, CliError, ExperimentConfig, MassSpec, Table};

/// Largest fraction of grid points allowed to break order or zero-set inclusion.
pub const VIOLATION_LIMIT: f64 = 1e-3;
/// Relative error allowed between an empirical Laplace ratio and its target.
pub const LAPLACE_RATIO_TOL: f64 = 0.05;
/// Spread allowed in s^α · tail for the Bessel excursion tail.
pub const TAIL_SHAPE_TOL: f64 = 0.25;
/// Standard errors of slack in the excursion tail sandwich.
pub const TAIL_BAND_SE: f64 = 3.0;
const MOMENT_Z: f64 = 3.0;
const MAX_ROWS_PER_PATH: usize = 10_000;

enum Process {
    Exact(f64),
    Euler(DriftField),
}

fn process(cfg: &ExperimentConfig, default: &str) -> Result<(String, Process, f64), CliError> {
    let alpha = alpha_or(cfg, 0.5);
    let name = cfg.process.clone().unwrap_or_else(|| default.to_string());
    let p = match name.as_str() {
        "exact" => Process::Exact(alpha),
        "bessel" => Process::Euler(DriftField::bessel(alpha)?),
        "relativistic" => Process::Euler(DriftField::relativistic(alpha, mass_or(cfg, alpha, 1.0)?)?),
        "perturbed" => {
            let c1 = cfg.c1.unwrap_or(1.0);
            Process::Euler(DriftField::perturbed(alpha, c1, Perturbation::power(alpha, c1))?)
        }
        _ => return Err(CliError::Config(format!("process '{name}': expected exact, bessel, relativistic or perturbed"))),
    };
    Ok((name, p, alpha))
}

struct Simulated {
    rows: Vec<(f64, f64)>,
    inverse: InverseLocalTime,
    local_time: f64,
    end: f64,
    clean: bool,
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (name, proc_, alpha) = process(cfg, "bessel")?;
    let x0 = cfg.x0.unwrap_or(0.0);
    let horizon = cfg.horizon.unwrap_or(1.0);
    let dt = cfg.dt.unwrap_or(1e-4);
    let n_paths = cfg.n_paths.unwrap_or(1);
    let steps = step_count(horizon, dt)?;
    check_budget(cfg, n_paths as f64 * steps as f64)?;
    let mut checks = Vec::new();
    let band = band_for(cfg, dt, horizon, &mut checks)?;
    let thin = cfg.thin.unwrap_or_else(|| steps.div_ceil(MAX_ROWS_PER_PATH).max(1));

    let results = parallel_tasks(n_paths, cfg.workers, cfg.master_seed, |_, rng| -> Result<Simulated, CliError> {
        let path = match &proc_ {
            Process::Exact(a) => simulate_bessel_exact(*a, x0, horizon, dt, rng)?,
            Process::Euler(f) => simulate_reflected(f, x0, horizon, dt, rng)?,
        };
        let clean = path.values.iter().all(|v| v.is_finite() && *v >= 0.0);
        let mut rows = vec![(0.0, x0)];
        rows.extend((thin..=steps).step_by(thin).map(|k| (k as f64 * dt, path.at(k))));
        let l = local_time(&path, band)?;
        let n = l.completions.len();
        let stride = n.div_ceil(200).max(1);
        let levels: Vec<f64> = (0..n).step_by(stride).map(|k| k as f64 * band.gauge).collect();
        let inverse = ilt_core::diffusion::inverse_local_time(&l, &levels)?;
        Ok(Simulated { rows, inverse, local_time: l.total(), end: path.at(steps), clean })
    })?
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new("simulate", &["path", "time", "value"]);
    let mut lt = Table::new("simulate_local_time", &["path", "level", "S"]);
    for (i, r) in results.iter().enumerate() {
        for &(t, v) in &r.rows {
            table.push(vec![i.into(), t.into(), v.into()]);
        }
        for (l, s) in r.inverse.levels.iter().zip(&r.inverse.times) {
            lt.push(vec![i.into(), (*l).into(), (*s).into()]);
        }
    }
    let clean = results.iter().all(|r| r.clean);
    checks.push(Check::flag("paths_finite_nonnegative", f64::from(u8::from(clean)), "true", clean));
    let nf = n_paths as f64;
    checks.push(Check::info("mean_local_time", results.iter().map(|r| r.local_time).sum::<f64>() / nf));
    if matches!(name.as_str(), "exact" | "bessel") && n_paths >= 100 {
        // E X_T² = x0² + (2 − 2α) T for the Bessel process of dimension 2 − 2α
        let sq: Vec<f64> = results.iter().map(|r| r.end * r.end).collect();
        let mean = sq.iter().sum::<f64>() / nf;
        let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let target = x0 * x0 + (2.0 - 2.0 * alpha) * horizon;
        let z = (mean - target) / (var / nf).sqrt();
        checks.push(Check::info("second_moment", mean));
        checks.push(Check::within("second_moment_z", z, -MOMENT_Z, MOMENT_Z));
    }
    Ok((vec![table, lt], checks))
}

fn coupled_config(cfg: &ExperimentConfig, checks: &mut Vec<Check>, default_paths: usize) -> Result<CoupledConfig, CliError> {
    let alpha = alpha_or(cfg, 0.25);
    let c1 = cfg.c1.unwrap_or(1.0);
    let mut cc = CoupledConfig::standard(alpha, c1)?;
    cc.mass = match cfg.m {
        Some(MassSpec::Value(m)) => Some(m),
        _ => None,
    };
    cc.x0 = cfg.x0.unwrap_or(0.0);
    cc.horizon = cfg.horizon.unwrap_or(cc.horizon);
    cc.dt = cfg.dt.unwrap_or(cc.dt);
    cc.n_paths = cfg.n_paths.unwrap_or(default_paths);
    cc.level = cfg.level;
    cc.band = band_for(cfg, cc.dt, cc.horizon, checks)?;
    check_budget(cfg, 3.0 * cc.n_paths as f64 * cc.steps()? as f64)?;
    Ok(cc)
}

pub fn compare(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut checks = Vec::new();
    let cc = coupled_config(cfg, &mut checks, 10_000)?;
    let s = run_coupled(&cc, cfg.master_seed, cfg.workers)?;
    let mut table = Table::new(
        "compare",
        &["path", "L_relativistic", "L_perturbed", "L_bessel", "S_relativistic", "S_perturbed", "S_bessel"],
    );
    let l = &s.local_times;
    let v = &s.inverse_times;
    for i in 0..cc.n_paths {
        table.push(vec![
            i.into(),
            l.relativistic[i].total().into(),
            l.perturbed[i].total().into(),
            l.bessel[i].total().into(),
            v.relativistic[i].into(),
            v.perturbed[i].into(),
            v.bessel[i].into(),
        ]);
    }
    checks.push(Check::info("m", s.m));
    checks.push(Check::info("level", s.level));
    checks.push(Check::at_most("order_relativistic_perturbed", s.order_violations[0], VIOLATION_LIMIT));
    checks.push(Check::at_most("order_perturbed_bessel", s.order_violations[1], VIOLATION_LIMIT));
    checks.push(Check::at_most("zero_set_relativistic_perturbed", s.zero_set_violations[0], VIOLATION_LIMIT));
    checks.push(Check::at_most("zero_set_perturbed_bessel", s.zero_set_violations[1], VIOLATION_LIMIT));
    let d1 = dominance_of_draws(&v.perturbed, &v.bessel)?;
    checks.push(Check::flag("dominance_perturbed_bessel", d1.max_cdf_crossing, format!("<= {:e}", d1.critical_value), d1.ok));
    let d2 = dominance_of_draws(&v.relativistic, &v.perturbed)?;
    checks.push(Check::flag(
        "dominance_relativistic_perturbed",
        d2.max_cdf_crossing,
        format!("<= {:e}", d2.critical_value),
        d2.ok,
    ));
    let censored = v.bessel.iter().filter(|x| x.is_infinite()).count();
    checks.push(Check::info("censored_bessel", censored as f64));
    Ok((vec![table], checks))
}

pub fn laplace_fit(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (name, proc_, alpha) = process(cfg, "exact")?;
    let dt = cfg.dt.unwrap_or(1e-5);
    let time_cap = cfg.time_cap.unwrap_or(12.0);
    let n_paths = cfg.n_paths.unwrap_or(10_000);
    check_budget(cfg, n_paths as f64 * step_count(time_cap, dt)? as f64)?;
    let mut checks = Vec::new();
    let band = band_for(cfg, dt, time_cap, &mut checks)?;
    let level = cfg.level.unwrap_or(0.4);
    let lambdas = cfg.lambda_grid.clone().unwrap_or_else(|| vec![0.5, 2.0, 4.0]);
    let lambda_ref = cfg.lambda_ref.unwrap_or(1.0);
    let tol = cfg.tolerance.unwrap_or(LAPLACE_RATIO_TOL);
    let m = match &proc_ {
        Process::Euler(DriftField::RelativisticBessel { mass, .. }) => Some(mass.get()),
        _ => None,
    };
    let run = LaplaceRunConfig {
        process: match proc_ {
            Process::Exact(a) => LaplaceProcess::ExactBessel { alpha: a },
            Process::Euler(f) => LaplaceProcess::Euler(f),
        },
        x0: cfg.x0.unwrap_or(0.0),
        dt,
        band,
        level,
        n_paths,
        time_cap,
    };
    let sample = ilt_core::diffusion::inverse_local_time_sample(&run, cfg.master_seed, cfg.workers)?;
    let fit = laplace_ratio_with_error(&sample, &lambdas, lambda_ref)?;
    let target = |l: f64| match (name.as_str(), m) {
        ("exact" | "bessel", _) => Some((l / lambda_ref).powf(alpha)),
        ("relativistic", Some(m)) => Some(((l + m).powf(alpha) - m.powf(alpha)) / ((lambda_ref + m).powf(alpha) - m.powf(alpha))),
        _ => None,
    };
    let mut table = Table::new("laplace_fit", &["lambda", "ratio", "stderr", "target", "rel_error"]);
    for (i, &l) in lambdas.iter().enumerate() {
        let r = fit.ratios[i];
        let t = target(l).unwrap_or(f64::NAN);
        table.push(vec![l.into(), r.into(), fit.stderr[i].into(), t.into(), (r / t - 1.0).into()]);
        if target(l).is_some() {
            checks.push(Check::at_most(format!("ratio_rel_error_{l}"), (r / t - 1.0).abs(), tol));
        }
    }
    let censored = sample.draws.iter().filter(|x| x.is_infinite()).count();
    checks.push(Check::info("censored_fraction", censored as f64 / n_paths as f64));
    checks.push(Check::info("level", level));
    Ok((vec![table], checks))
}

fn normalised(t: &ExcursionTail) -> (Vec<f64>, Vec<f64>) {
    let se = t.stderr();
    let (t0, r0) = (t.tail[0], se[0] / t.tail[0]);
    let norm: Vec<f64> = t.tail.iter().map(|v| v / t0).collect();
    let nse = norm
        .iter()
        .zip(t.tail.iter().zip(&se))
        .map(|(n, (v, s))| n * ((s / v).powi(2) + r0 * r0).sqrt())
        .collect();
    (norm, nse)
}

pub fn excursions(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut checks = Vec::new();
    let mut s_grid = cfg.s_grid.clone().unwrap_or_else(|| vec![0.01, 0.02, 0.04, 0.08, 0.16]);
    s_grid.sort_by(f64::total_cmp);
    s_grid.dedup();
    let mut cc = coupled_config(cfg, &mut checks, 2_000)?;
    cc.excursion_min = 0.5 * s_grid[0];
    let s = run_coupled(&cc, cfg.master_seed, cfg.workers)?;
    let tails = s.local_times.map(|l| excursion_tail_estimate(l, &s_grid));
    let (rel, per, bes) = (tails.relativistic?, tails.perturbed?, tails.bessel?);
    let (nr, er) = normalised(&rel);
    let (np, ep) = normalised(&per);
    let (nb, eb) = normalised(&bes);
    let band: Vec<f64> = (0..s_grid.len())
        .map(|i| TAIL_BAND_SE * (er[i].hypot(ep[i])).max(ep[i].hypot(eb[i])))
        .collect();
    let sandwich = tail_sandwich_check(&nr, &np, &nb, &band)?;

    let mut table = Table::new(
        "excursions",
        &[
            "s",
            "tail_relativistic",
            "tail_perturbed",
            "tail_bessel",
            "norm_relativistic",
            "norm_perturbed",
            "norm_bessel",
            "band",
        ],
    );
    for i in 0..s_grid.len() {
        table.push(vec![
            s_grid[i].into(),
            rel.tail[i].into(),
            per.tail[i].into(),
            bes.tail[i].into(),
            nr[i].into(),
            np[i].into(),
            nb[i].into(),
            band[i].into(),
        ]);
    }
    let alpha = cc.alpha;
    let scaled: Vec<f64> = s_grid.iter().zip(&bes.tail).map(|(s, t)| t * s.powf(alpha)).collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
    checks.push(Check::info("m", s.m));
    checks.push(Check::flag(
        "tail_sandwich",
        sandwich.max_lower_violation.max(sandwich.max_upper_violation),
        "<= 0",
        sandwich.ok,
    ));
    checks.push(Check::at_most("bessel_tail_shape", hi / lo - 1.0, TAIL_SHAPE_TOL));
    Ok((vec![table], checks))
}
