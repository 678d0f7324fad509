//! Trace-process experiments: subordinated Lévy densities and Green
//! functions on (−1, 1).

use ilt_core::green::{green_mc_estimate, green_ratio_report, uniform_bins, GreenConfig};
use ilt_core::subordinator::LevyDensity;
use ilt_core::trace::{j_bound_check, j_difference, stable_trace_density, subordinated_levy_density};

use super::{alpha_or, geom, mass_or, Outcome};
use crate::{Check, CliError, ExperimentConfig, Table};

/// Relative agreement required between the stable quadrature and its closed form.
pub const TRACE_QUAD_TOL: f64 = 1e-6;
/// Ratio band for the m = 0 Green self-consistency.
pub const SELF_CONSISTENCY: (f64, f64) = (0.8, 1.25);

pub fn trace(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let alpha = alpha_or(cfg, 0.5);
    let m = mass_or(cfg, alpha, 1.0)?;
    let d = cfg.d.unwrap_or(2);
    let grid = cfg.r_grid.clone().unwrap_or_else(|| geom(1e-3, 1.0, 61));
    let report = j_bound_check(alpha, m, d, &grid)?;
    let nu_a = LevyDensity::stable(alpha)?;
    let nu_m = LevyDensity::relativistic(alpha, m)?;
    let p = 2.0 - 2.0 * alpha - d as f64;
    let mut table = Table::new("trace", &["r", "mu_stable", "mu", "j", "bound"]);
    let (mut quad_err, mut j_min) = (0.0_f64, f64::INFINITY);
    for &r in &grid {
        let closed = stable_trace_density(alpha, d, r)?;
        let quad = subordinated_levy_density(&nu_a, d, r)?;
        quad_err = quad_err.max((quad / closed - 1.0).abs());
        let j = j_difference(alpha, m, d, r)?;
        j_min = j_min.min(j);
        let mu = subordinated_levy_density(&nu_m, d, r)?;
        table.push(vec![r.into(), closed.into(), mu.into(), j.into(), (report.c_effective * r.powf(p)).into()]);
    }
    let checks = vec![
        Check::at_most("stable_quadrature", quad_err, TRACE_QUAD_TOL),
        Check::at_least("j_nonnegative", j_min, 0.0),
        Check::flag("j_bound_refinement_stable", report.c_effective, "C_eff finite, < 1% change under refinement", report.ok),
        Check::flag("j_within_split_bound", f64::from(u8::from(report.within_split_bound)), "true", report.within_split_bound),
        Check::info("c_refined", report.c_refined),
        Check::info("c_tight", report.c_tight),
        Check::info("argmax", report.argmax),
        Check::info("proof_constant", report.proof_constant.unwrap_or(f64::NAN)),
    ];
    Ok((vec![table], checks))
}

pub fn green(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let alpha = alpha_or(cfg, 0.25);
    let m = mass_or(cfg, alpha, 0.0)?;
    let mut gc = GreenConfig::standard(alpha, m, cfg.x.unwrap_or(0.0));
    if let Some(b) = cfg.bins {
        gc.bins = uniform_bins(b);
    }
    gc.n_paths = cfg.n_paths.unwrap_or(gc.n_paths);
    gc.gap = cfg.gap.unwrap_or(gc.gap);
    gc.step_budget = cfg.step_budget.unwrap_or(gc.step_budget);
    let est = green_mc_estimate(&gc, cfg.master_seed, cfg.workers)?;
    let rep = green_ratio_report(&est, 2.0 * alpha)?;

    let mut table = Table::new("green", &["bin_center", "G_mc", "stderr", "G_stable", "ratio"]);
    for (j, c) in est.centres().into_iter().enumerate() {
        table.push(vec![
            c.into(),
            est.values[j].into(),
            est.stderr[j].into(),
            rep.reference[j].into(),
            rep.ratios[j].into(),
        ]);
    }
    let mut line = Table::new("green_ratio", &["min_ratio", "max_ratio", "ok"]);
    line.push(vec![rep.min_ratio.into(), rep.max_ratio.into(), rep.ok.into()]);

    let mut checks = vec![Check::info("min_ratio", rep.min_ratio), Check::info("max_ratio", rep.max_ratio)];
    match (&cfg.ratio_range, m == 0.0) {
        (Some(r), _) => checks.push(Check::flag(
            "ratio_range",
            rep.max_ratio,
            format!("ratios in [{:e}, {:e}]", r[0], r[1]),
            rep.within(r[0], r[1]),
        )),
        (None, true) => {
            let (lo, hi) = SELF_CONSISTENCY;
            checks.push(Check::flag("self_consistency", rep.max_ratio, format!("ratios in [{lo}, {hi}]"), rep.within(lo, hi)))
        }
        (None, false) => {
            checks.push(Check::flag("comparability", rep.max_ratio, format!("ratios in [1/{0}, {0}]", rep.cap), rep.ok))
        }
    }
    checks.push(Check::info("mean_exit_time", est.mean_exit_time));
    checks.push(Check::info("truncated_paths", est.truncated as f64));
    Ok((vec![table, line], checks))
}
