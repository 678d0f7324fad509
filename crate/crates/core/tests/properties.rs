use ilt_core::diffusion::{drift_eval, mass_for_perturbation, mass_from_c1, Band, DowncrossingCounter, DriftField, Perturbation};
use ilt_core::rng::parallel_tasks;
use ilt_core::specfun::{drift_ratio, drift_ratio_asymptotic, rho_m, Regime};
use ilt_core::subordinator::{dominance_of_draws, LaplaceExponent, LevyDensity};
use proptest::prelude::*;
use rand::Rng;

fn close(a: f64, b: f64, ulps: f64) -> bool {
    (a - b).abs() <= ulps * f64::EPSILON * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn esscher_of_stable_is_relativistic(a in 0.01f64..0.99, m in 0.0f64..50.0, l in 0.0f64..1e3) {
        let e = LaplaceExponent::stable(a).unwrap().esscher(m).unwrap().eval(l).unwrap();
        let r = LaplaceExponent::relativistic(a, m).unwrap().eval(l).unwrap();
        prop_assert!(close(e, r, 64.0), "{e} vs {r}");
    }

    #[test]
    fn esscher_composes(a in 0.01f64..0.99, m in 0.0f64..20.0, n in 0.0f64..20.0, l in 0.0f64..1e3) {
        let phi = LaplaceExponent::stable(a).unwrap();
        let twice = phi.esscher(m).unwrap().esscher(n).unwrap().eval(l).unwrap();
        let once = phi.esscher(m + n).unwrap().eval(l).unwrap();
        prop_assert!(close(twice, once, 64.0), "{twice} vs {once}");
    }

    #[test]
    fn relativistic_exponent_is_bernstein_like(a in 0.05f64..0.95, m in 0.0f64..10.0, l in 1e-3f64..1e2, h in 1e-3f64..1.0) {
        let phi = LaplaceExponent::relativistic(a, m).unwrap();
        let (f0, f1, f2) = (phi.eval(l).unwrap(), phi.eval(l + h).unwrap(), phi.eval(l + 2.0 * h).unwrap());
        prop_assert!(f0 >= 0.0 && f1 >= f0);
        // Concavity, up to rounding in the second difference.
        prop_assert!(f2 - 2.0 * f1 + f0 <= 1e-12 * f2.max(1.0));
        prop_assert_eq!(phi.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn relativistic_levy_density_lies_below_stable(a in 0.05f64..0.95, m in 0.0f64..10.0, t in 1e-4f64..1e2) {
        let s = LevyDensity::stable(a).unwrap();
        let r = LevyDensity::relativistic(a, m).unwrap();
        let d = LevyDensity::stable_minus_relativistic(a, m).unwrap();
        let (vs, vr, vd) = (s.eval(t).unwrap(), r.eval(t).unwrap(), d.eval(t).unwrap());
        prop_assert!(vd >= 0.0 && vr <= vs * (1.0 + 1e-14));
        prop_assert!((vs - vr - vd).abs() <= 1e-10 * vs);
    }

    #[test]
    fn rho_decreases_from_one(a in 0.05f64..0.95, m in 0.01f64..10.0, x in 1e-3f64..5.0, dx in 1e-3f64..1.0) {
        let r0 = rho_m(a, m, 0.0).unwrap();
        let (r1, r2) = (rho_m(a, m, x).unwrap(), rho_m(a, m, x + dx).unwrap());
        prop_assert!((r0 - 1.0).abs() < 1e-12);
        prop_assert!(r1 <= 1.0 && r2 <= r1 && r2 > 0.0);
        prop_assert!(drift_ratio(a, m, x).unwrap() < 0.0);
    }

    #[test]
    fn relativistic_drift_lies_below_bessel(a in 0.05f64..0.95, m in 0.0f64..10.0, x in 1e-3f64..10.0) {
        let lo = drift_eval(&DriftField::relativistic(a, m).unwrap(), x).unwrap();
        let hi = drift_eval(&DriftField::bessel(a).unwrap(), x).unwrap();
        prop_assert!(lo <= hi);
    }

    #[test]
    fn mass_from_c1_dominates_both_asymptotes(a in 0.05f64..0.95, c1 in 0.01f64..5.0) {
        let m = mass_from_c1(a, c1).unwrap();
        let zero = drift_ratio_asymptotic(a, m, Regime::Zero).unwrap();
        let inf = drift_ratio_asymptotic(a, m, Regime::Infinity).unwrap();
        prop_assert!(-zero.coefficient >= c1 * (1.0 - 1e-12));
        prop_assert!(-inf.coefficient >= c1 * (1.0 - 1e-12));
    }

    #[test]
    fn selected_mass_dominates_the_perturbation(a in 0.05f64..0.95, c1 in 0.01f64..5.0, x in 1e-4f64..20.0) {
        let f = Perturbation::power(a, c1);
        let m = mass_for_perturbation(a, c1, &f).unwrap().m;
        prop_assert!(m >= mass_from_c1(a, c1).unwrap());
        // Checked between the spot-grid points too, with a little slack.
        prop_assert!(f.eval(x) <= -drift_ratio(a, m, x).unwrap() * (1.0 + 1e-2));
    }

    #[test]
    fn local_time_and_inverse_are_monotone(xs in prop::collection::vec(0.0f64..0.2, 2..400), eps in 0.01f64..0.1) {
        let band = Band::new(eps).unwrap();
        let mut c = DowncrossingCounter::new(band, 0.0, 1, true);
        for &x in &xs {
            c.push(x);
        }
        let l = c.finish(1e-4);
        let v = l.values();
        prop_assert_eq!(v.len(), xs.len() + 1);
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        let levels: Vec<f64> = (0..20).map(|k| k as f64 * l.gauge * 0.37).collect();
        let inv: Vec<f64> = levels.iter().map(|&t| l.inverse_or_censored(t)).collect();
        prop_assert!(inv.windows(2).all(|w| w[0] <= w[1]));
        for (&t, &s) in levels.iter().zip(&inv) {
            if s.is_finite() {
                // L jumps past t exactly at S(t).
                let k = (s / l.dt).round() as usize;
                prop_assert!(l.at_step(k) > t && (k == 0 || l.at_step(k - 1) <= t));
            }
        }
    }

    #[test]
    fn shifted_sample_fails_dominance(shift in 0.5f64..2.0, seed in 0u64..1000) {
        let base: Vec<f64> = parallel_tasks(2000, 1, seed, |_, rng| rng.random::<f64>()).unwrap();
        let upper: Vec<f64> = base.iter().map(|x| x + shift).collect();
        prop_assert!(dominance_of_draws(&base, &upper).unwrap().ok);
        prop_assert!(!dominance_of_draws(&upper, &base).unwrap().ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn parallel_map_ignores_worker_count(seed in any::<u64>(), n in 1usize..200, workers in 2usize..9) {
        let draw = |_: usize, rng: &mut ilt_core::rng::Stream| rng.random::<u64>();
        let one = parallel_tasks(n, 1, seed, draw).unwrap();
        let many = parallel_tasks(n, workers, seed, draw).unwrap();
        prop_assert_eq!(one, many);
    }
}
