//! Deterministic experiments: special functions, exponent algebra, Lévy
//! densities and complete monotonicity.

use ilt_core::diffusion::rho_ode_residual;
use ilt_core::rng::derive_substream;
use ilt_core::specfun::{bessel_i, bessel_k, c_alpha, drift_ratio, drift_ratio_asymptotic, Regime};
use ilt_core::subordinator::{
    bernstein_check, complete_monotonicity_check, levy_sandwich_check, validate_bernstein, CmReport, LaplaceExponent,
    LevyDensity,
};
use rand::Rng;

use super::{alpha_or, geom, mass_or, Outcome};
use crate::{Check, CliError, ExperimentConfig, Table};

pub const K_HALF_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const RHO_TOL: f64 = 1e-5;
pub const RICCATI_TOL: f64 = 1e-6;
pub const ASYMPTOTE_BAND: (f64, f64) = (0.99, 1.01);
pub const ESSCHER_ULPS: f64 = 64.0;
pub const LAPLACE_LEVY_TOL: f64 = 1e-6;

const SUITES: [&str; 3] = ["bessel", "rho", "asymptotics"];
const IDENTITY_ORDERS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// Five-point central difference.
fn deriv(f: impl Fn(f64) -> Result<f64, CliError>, x: f64, h: f64) -> Result<f64, CliError> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

struct Rows {
    table: Table,
    checks: Vec<Check>,
}

impl Rows {
    fn add(&mut self, suite: &str, name: &str, alpha: f64, m: f64, check: Check) {
        self.table.push(vec![
            suite.into(),
            name.into(),
            alpha.into(),
            m.into(),
            check.value.into(),
            check.threshold.as_str().into(),
            check.pass.into(),
        ]);
        self.checks.push(check);
    }
}

pub fn specfun_check(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let suites = cfg.suite.clone().unwrap_or_else(|| vec!["bessel".into(), "rho".into()]);
    if let Some(s) = suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return Err(CliError::Config(format!("unknown suite '{s}' (bessel, rho, asymptotics)")));
    }
    let alphas = cfg.alphas.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let masses = cfg.masses.clone().unwrap_or_else(|| vec![0.5, 1.0, 4.0]);
    let mut rows = Rows {
        table: Table::new("specfun_check", &["suite", "check", "alpha", "m", "value", "tolerance", "pass"]),
        checks: Vec::new(),
    };
    let nan = f64::NAN;

    if suites.iter().any(|s| s == "bessel") {
        let xs = geom(1e-3, 50.0, 400);
        let mut worst = 0.0_f64;
        for &x in &xs {
            let closed = std::f64::consts::PI * (-x).exp() / (std::f64::consts::PI.sqrt() * (2.0 * x).sqrt());
            worst = worst.max((bessel_k(0.5, x)? / closed - 1.0).abs());
        }
        rows.add("bessel", "k_half_closed_form", nan, nan, Check::at_most("bessel/k_half_closed_form", worst, K_HALF_TOL));

        let (mut rec, mut der, mut wr) = (0.0_f64, 0.0_f64, 0.0_f64);
        for &nu in &IDENTITY_ORDERS {
            for &x in &xs {
                let (km, k0, kp) = (bessel_k(nu - 1.0, x)?, bessel_k(nu, x)?, bessel_k(nu + 1.0, x)?);
                rec = rec.max((kp - km - 2.0 * nu / x * k0).abs() / kp);
                let h = 1e-3 * x.min(10.0);
                let dk = deriv(|y| Ok(bessel_k(nu, y)?), x, h)?;
                der = der.max((-2.0 * dk - (km + kp)).abs() / (km + kp));
                let w = bessel_i(nu, x)? * kp + bessel_i(nu + 1.0, x)? * k0;
                wr = wr.max((w * x - 1.0).abs());
            }
        }
        rows.add("bessel", "k_recurrence", nan, nan, Check::at_most("bessel/k_recurrence", rec, IDENTITY_TOL));
        rows.add("bessel", "k_derivative", nan, nan, Check::at_most("bessel/k_derivative", der, IDENTITY_TOL));
        rows.add("bessel", "i_k_wronskian", nan, nan, Check::at_most("bessel/i_k_wronskian", wr, IDENTITY_TOL));
    }

    if suites.iter().any(|s| s == "rho") {
        let grid = geom(0.05, 10.0, 50);
        for &a in &alphas {
            for &m in &masses {
                let r = rho_ode_residual(a, m, &grid)?;
                rows.add("rho", "ode_residual", a, m, Check::at_most(format!("rho/ode_residual/{a}/{m}"), r, RHO_TOL));
                let mut worst = 0.0_f64;
                for &x in &grid {
                    let h = 1e-3 * x.min(1.0);
                    let dr = deriv(|y| Ok(drift_ratio(a, m, y)?), x, h)?;
                    let r = drift_ratio(a, m, x)?;
                    let rhs = 2.0 * m - (1.0 - 2.0 * a) * r / x - r * r;
                    worst = worst.max((dr - rhs).abs() / (2.0 * m));
                }
                rows.add("rho", "riccati", a, m, Check::at_most(format!("rho/riccati/{a}/{m}"), worst, RICCATI_TOL));
            }
        }
    }

    if suites.iter().any(|s| s == "asymptotics") {
        let (lo, hi) = ASYMPTOTE_BAND;
        for &a in &alphas {
            for &m in &masses {
                let x0 = 1e-4;
                let z = drift_ratio(a, m, x0)? / drift_ratio_asymptotic(a, m, Regime::Zero)?.eval(x0);
                rows.add("asymptotics", "zero", a, m, Check::within(format!("asymptotics/zero/{a}/{m}"), z, lo, hi));
                let xi = 50.0 / (2.0 * m).sqrt();
                let r = drift_ratio(a, m, xi)? / drift_ratio_asymptotic(a, m, Regime::Infinity)?.eval(xi);
                rows.add("asymptotics", "infinity", a, m, Check::within(format!("asymptotics/infinity/{a}/{m}"), r, lo, hi));
                if a == 0.5 {
                    let mut worst = 0.0_f64;
                    for &x in &geom(1e-4, 100.0, 60) {
                        let d = drift_ratio(a, m, x)?;
                        for regime in [Regime::Zero, Regime::Infinity] {
                            worst = worst.max((d / drift_ratio_asymptotic(a, m, regime)?.eval(x) - 1.0).abs());
                        }
                    }
                    let c = Check::at_most(format!("asymptotics/exact_half/{m}"), worst, 4.0 * f64::EPSILON);
                    rows.add("asymptotics", "exact_half", a, m, c);
                }
            }
        }
    }
    Ok((vec![rows.table], rows.checks))
}

pub fn phi(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let alpha = alpha_or(cfg, 0.5);
    let m = mass_or(cfg, alpha, 1.0)?;
    let grid = cfg.lambda_grid.clone().unwrap_or_else(|| geom(1e-3, 1e3, 61));
    let stable = LaplaceExponent::stable(alpha)?;
    let rel = LaplaceExponent::relativistic(alpha, m)?;
    let tilted = stable.esscher(m)?;
    let mut table = Table::new("phi", &["lambda", "phi_stable", "phi_relativistic", "phi_esscher", "abs_diff"]);
    for &l in &grid {
        let (s, r, e) = (stable.eval(l)?, rel.eval(l)?, tilted.eval(l)?);
        table.push(vec![l.into(), s.into(), r.into(), e.into(), (r - e).abs().into()]);
    }

    let n = cfg.n_random.unwrap_or(1000);
    let mut rng = derive_substream(cfg.master_seed, 0);
    let (mut identity, mut compose, mut compose_rel) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..n {
        let a: f64 = rng.random_range(0.05..0.95);
        let m1 = 10f64.powf(rng.random_range(-2.0..1.0));
        let n1 = 10f64.powf(rng.random_range(-2.0..1.0));
        let m0 = 10f64.powf(rng.random_range(-2.0..1.0));
        let l = 10f64.powf(rng.random_range(-3.0..2.0));
        let c = c_alpha(a)?;
        let s = LaplaceExponent::stable(a)?;
        let lhs = s.esscher(m1)?.eval(l)?;
        let rhs = LaplaceExponent::relativistic(a, m1)?.eval(l)?;
        identity = identity.max((lhs - rhs).abs() / (c * (l + m1).powf(a)));
        let scale = c * (l + m1 + n1 + m0).powf(a);
        let twice = s.esscher(m1)?.esscher(n1)?.eval(l)?;
        let once = s.esscher(m1 + n1)?.eval(l)?;
        compose = compose.max((twice - once).abs() / scale);
        let r = LaplaceExponent::relativistic(a, m0)?;
        let twice = r.esscher(m1)?.esscher(n1)?.eval(l)?;
        let once = r.esscher(m1 + n1)?.eval(l)?;
        compose_rel = compose_rel.max((twice - once).abs() / scale);
    }
    let tol = ESSCHER_ULPS * f64::EPSILON;
    let bern = validate_bernstein(&rel, &geom(1e-3, 1e3, 61))?;
    let checks = vec![
        Check::at_most("esscher_stable_is_relativistic", identity, tol),
        Check::at_most("esscher_composition_stable", compose, tol),
        Check::at_most("esscher_composition_relativistic", compose_rel, tol),
        Check::flag("relativistic_bernstein", bern.monotone_violation.max(bern.concavity_violation), "ok", bern.ok),
        Check::info("n_random", n as f64),
    ];
    Ok((vec![table], checks))
}

pub fn levy(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let alpha = alpha_or(cfg, 0.5);
    let m = mass_or(cfg, alpha, 1.0)?;
    let t_grid = cfg.s_grid.clone().unwrap_or_else(|| geom(1e-3, 1e2, 51));
    let lambdas = cfg.lambda_grid.clone().unwrap_or_else(|| vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0]);
    let nu_a = LevyDensity::stable(alpha)?;
    let nu_m = LevyDensity::relativistic(alpha, m)?;
    let diff = LevyDensity::stable_minus_relativistic(alpha, m)?;
    let c = c_alpha(alpha)?;
    let mut table = Table::new(
        "levy",
        &["t", "nu_stable", "nu_relativistic", "difference", "upper_bound", "tail_stable", "tail_relativistic"],
    );
    let mut tails_ordered = true;
    for &t in &t_grid {
        let bound = -c * t.powf(-1.0 - alpha) * (-m * t).exp_m1();
        let (ta, tm) = (nu_a.tail(t)?, nu_m.tail(t)?);
        tails_ordered &= tm <= ta * (1.0 + 1e-9);
        table.push(vec![
            t.into(),
            nu_a.eval(t)?.into(),
            nu_m.eval(t)?.into(),
            diff.eval(t)?.into(),
            bound.into(),
            ta.into(),
            tm.into(),
        ]);
    }
    let sandwich = levy_sandwich_check(&nu_m, &nu_a, &t_grid)?;

    let mut lap = Table::new("levy_laplace", &["lambda", "phi_stable", "quad_stable", "phi_relativistic", "quad_relativistic"]);
    let (pa, pm) = (LaplaceExponent::stable(alpha)?, LaplaceExponent::relativistic(alpha, m)?);
    let mut worst = 0.0_f64;
    for &l in &lambdas {
        let (fa, fm) = (pa.eval(l)?, pm.eval(l)?);
        let (qa, qm) = (c * nu_a.laplace_integral(l)?, c * nu_m.laplace_integral(l)?);
        worst = worst.max((qa / fa - 1.0).abs()).max((qm / fm - 1.0).abs());
        lap.push(vec![l.into(), fa.into(), qa.into(), fm.into(), qm.into()]);
    }
    let checks = vec![
        Check::flag(
            "levy_sandwich",
            sandwich.max_lower_violation.max(sandwich.max_upper_violation),
            "<= 0",
            sandwich.ok,
        ),
        Check::at_most("laplace_levy_consistency", worst, LAPLACE_LEVY_TOL),
        Check::flag("tails_ordered", f64::from(u8::from(tails_ordered)), "relativistic <= stable", tails_ordered),
    ];
    Ok((vec![table, lap], checks))
}

fn cm_row(table: &mut Table, name: &str, order: usize, r: &CmReport) {
    let failing = r.failing_order.map_or(-1, |k| k as i64);
    table.push(vec![name.into(), order.into(), r.ok.into(), r.worst_violation.into(), crate::Cell::Int(failing)]);
}

pub fn cm_check(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let alpha = alpha_or(cfg, 0.5);
    let m = mass_or(cfg, alpha, 1.0)?;
    let beta = cfg.beta.unwrap_or(0.5 * alpha);
    if beta >= alpha {
        return Err(CliError::Config(format!("beta = {beta} must be below alpha = {alpha}")));
    }
    let order = cfg.order.unwrap_or(6);
    let grid = cfg.lambda_grid.clone().unwrap_or_else(|| geom(1e-2, 1e2, 64));
    let pa = LaplaceExponent::stable(alpha)?;
    let pm = LaplaceExponent::relativistic(alpha, m)?;
    let pb = LaplaceExponent::stable(beta)?;
    let diff = |l: f64| pa.eval(l).unwrap_or(f64::NAN) - pm.eval(l).unwrap_or(f64::NAN);
    let ratio = |l: f64| pb.eval(l).unwrap_or(f64::NAN) / pa.eval(l).unwrap_or(f64::NAN);

    let mut table = Table::new("cm_check", &["function", "order", "ok", "worst_violation", "failing_order"]);
    let mut checks = Vec::new();
    let d = complete_monotonicity_check(diff, &grid, order)?;
    cm_row(&mut table, "phi_stable_minus_relativistic", order, &d);
    checks.push(Check::flag("difference_cm", d.worst_violation, "ok", d.ok));
    let db = bernstein_check(diff, &grid, order)?;
    cm_row(&mut table, "phi_stable_minus_relativistic_bernstein", order, &db);
    checks.push(Check::flag("difference_bernstein", db.worst_violation, "ok", db.ok));
    let r = complete_monotonicity_check(ratio, &grid, order)?;
    cm_row(&mut table, "phi_beta_over_phi_alpha", order, &r);
    checks.push(Check::flag("ratio_cm", r.worst_violation, "ok", r.ok));

    let control_grid = geom(0.1, 10.0, 64);
    let positive: [(&str, fn(f64) -> f64); 3] =
        [("exp_minus_lambda", |l| (-l).exp()), ("inverse_lambda", |l| 1.0 / l), ("shifted_power", |l| (l + 1.0).powf(-0.5))];
    for (name, f) in positive {
        let rep = complete_monotonicity_check(f, &control_grid, order)?;
        cm_row(&mut table, name, order, &rep);
        checks.push(Check::flag(format!("control_{name}"), rep.worst_violation, "ok", rep.ok));
    }
    let negative: [(&str, fn(f64) -> f64); 3] =
        [("lambda", |l| l), ("lambda_squared", |l| l * l), ("sin_plus_two", |l| l.sin() + 2.0)];
    for (name, f) in negative {
        let rep = complete_monotonicity_check(f, &control_grid, order)?;
        cm_row(&mut table, name, order, &rep);
        checks.push(Check::flag(format!("negative_control_{name}"), rep.worst_violation, "rejected", !rep.ok));
    }
    Ok((vec![table], checks))
}
