//! Monte Carlo checks of the path simulators and local-time estimators
//! against reflected Brownian motion and Bessel scaling.

use ilt_core::diffusion::{
    excursion_tail_estimate, local_time, simulate_bessel_exact, simulate_reflected, Band, DowncrossingCounter, DriftField,
    Perturbation, SamplePath,
};
use ilt_core::rng::{derive_substream, parallel_tasks};
use ilt_core::specfun::c_alpha;
use ilt_core::subordinator::dominance_of_draws;
use ilt_core::trace::sample_trace_path;
use rand::Rng;
use rand_distr::StandardNormal;

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Two-sided two-sample KS at 99%, through the one-sided check run both ways.
fn same_law(a: &[f64], b: &[f64]) -> bool {
    dominance_of_draws(a, b).unwrap().ok && dominance_of_draws(b, a).unwrap().ok
}

fn paths(n: usize, seed: u64, f: impl Fn(&mut ilt_core::rng::Stream) -> SamplePath + Sync + Send) -> Vec<SamplePath> {
    parallel_tasks(n, 4, seed, |_, rng| f(rng)).unwrap()
}

#[test]
fn reflected_brownian_second_moment() {
    let field = DriftField::perturbed(0.5, 1.0, Perturbation::zero()).unwrap();
    let t = 1.0;
    let ends: Vec<f64> = paths(4000, 1, |rng| simulate_reflected(&field, 0.0, t, 1e-3, rng).unwrap())
        .iter()
        .map(|p| p.values.last().unwrap().powi(2))
        .collect();
    let (m, se) = mean_se(&ends);
    assert!((m - t).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn stronger_mass_spends_more_time_near_zero() {
    let eps = 0.1;
    let near = |m: f64, seed| {
        let field = DriftField::relativistic(0.5, m).unwrap();
        let ps = paths(400, seed, |rng| simulate_reflected(&field, 0.0, 2.0, 1e-3, rng).unwrap());
        let hits: usize = ps.iter().map(|p| p.values.iter().filter(|&&x| x <= eps).count()).sum();
        hits as f64 / (ps.len() * ps[0].values.len()) as f64
    };
    assert!(near(4.0, 2) > near(1.0, 3));
}

#[test]
fn exact_half_is_reflected_gaussian() {
    let (x0, t) = (0.7, 0.5);
    let exact: Vec<f64> = paths(10_000, 4, |rng| simulate_bessel_exact(0.5, x0, t, t, rng).unwrap())
        .iter()
        .map(|p| p.values[0])
        .collect();
    let mut rng = derive_substream(5, 0);
    let oracle: Vec<f64> = (0..10_000).map(|_| (x0 + t.sqrt() * rng.sample::<f64, _>(StandardNormal)).abs()).collect();
    assert!(same_law(&exact, &oracle));
}

#[test]
fn exact_bessel_moments_from_origin() {
    // Squared Bessel of dimension δ = 2 − 2α from 0: E X_t² = δt and
    // E X_t⁴ = δ(δ+2)t², whatever the number of grid steps.
    for (k, &a) in [0.3, 0.5, 0.7].iter().enumerate() {
        let d = 2.0 - 2.0 * a;
        for (j, &steps) in [1usize, 4, 50].iter().enumerate() {
            let t = 0.8;
            let ends: Vec<f64> = paths(20_000, 100 + 10 * k as u64 + j as u64, |rng| {
                simulate_bessel_exact(a, 0.0, t, t / steps as f64, rng).unwrap()
            })
            .iter()
            .map(|p| p.values.last().unwrap().powi(2))
            .collect();
            let (m2, se2) = mean_se(&ends);
            let sq: Vec<f64> = ends.iter().map(|x| x * x).collect();
            let (m4, se4) = mean_se(&sq);
            assert!((m2 - d * t).abs() < 3.0 * se2, "alpha {a} steps {steps}: {m2} ± {se2}");
            assert!((m4 - d * (d + 2.0) * t * t).abs() < 3.0 * se4, "alpha {a} steps {steps}: {m4} ± {se4}");
        }
    }
}

#[test]
fn occupation_near_zero_scales_with_speed_measure() {
    // P(X_t ≤ ε) ∝ ε^{2−2α} for small ε, so the occupation slope is 2 − 2α.
    let a = 0.25;
    let eps = [0.005, 0.01, 0.02, 0.04];
    let ps = paths(4000, 8, |rng| simulate_bessel_exact(a, 0.0, 1.0, 1e-3, rng).unwrap());
    let frac: Vec<f64> = eps
        .iter()
        .map(|&e| ps.iter().map(|p| p.values.iter().filter(|&&x| x <= e).count()).sum::<usize>() as f64)
        .collect();
    let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = frac.iter().map(|f| f.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 4.0, ly.iter().sum::<f64>() / 4.0);
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - (2.0 - 2.0 * a)).abs() < 0.1, "slope {slope}");
}

#[test]
fn local_time_is_brownian_self_similar() {
    let dt: f64 = 1e-4;
    let band = Band::new(3.0 * dt.sqrt()).unwrap();
    let scaled = |t: f64, seed| -> Vec<f64> {
        paths(1500, seed, |rng| simulate_bessel_exact(0.5, 0.0, t, dt, rng).unwrap())
            .iter()
            .map(|p| local_time(p, band).unwrap().total() / t.sqrt())
            .collect()
    };
    assert!(same_law(&scaled(1.0, 9), &scaled(4.0, 10)));
}

#[test]
fn gauge_compensates_band_width() {
    // On a grid the band is effectively widened by about 2 · 0.58 √dt (the
    // discrete-barrier overshoot), so ε₀ must sit well above √dt for the
    // compensated count to settle.
    let dt: f64 = 1e-4;
    let e0 = 6.0 * dt.sqrt();
    let ps = paths(1000, 11, |rng| simulate_bessel_exact(0.5, 0.0, 1.0, dt, rng).unwrap());
    let mean_l = |e: f64| {
        let band = Band::new(e).unwrap();
        ps.iter().map(|p| local_time(p, band).unwrap().total()).sum::<f64>() / ps.len() as f64
    };
    let (a, b) = (mean_l(e0), mean_l(2.0 * e0));
    assert!((a / b - 1.0).abs() < 0.1, "{a} vs {b}");
    // Both sit below E L_1 = √(2/π) of reflected Brownian motion.
    let truth = (2.0 / std::f64::consts::PI).sqrt();
    assert!(a < truth && b < truth);
}

#[test]
fn brownian_excursion_tail_has_half_power_shape() {
    let dt: f64 = 1e-4;
    let band = Band::new(3.0 * dt.sqrt()).unwrap();
    let s = [0.01, 0.04, 0.16];
    let floor = (0.5 * s[0] / dt) as u32;
    let ests = parallel_tasks(400, 4, 12, |_, rng| {
        let p = simulate_bessel_exact(0.5, 0.0, 2.0, dt, rng).unwrap();
        let mut c = DowncrossingCounter::new(band, p.x0, floor, false);
        for &x in &p.values {
            c.push(x);
        }
        c.finish(dt)
    })
    .unwrap();
    let tail = excursion_tail_estimate(&ests, &s).unwrap();
    let shaped: Vec<f64> = tail.tail.iter().zip(&s).map(|(v, s)| v * s.sqrt()).collect();
    for w in &shaped {
        assert!((w / shaped[0] - 1.0).abs() < 0.25, "{shaped:?}");
    }
}

#[test]
fn stable_trace_in_one_dimension_is_cauchy() {
    // E e^{iξX_1} = e^{−c_{1/2}|ξ|}: median |X_1| equals the Cauchy scale.
    let mut abs: Vec<f64> = parallel_tasks(10_000, 4, 13, |_, rng| sample_trace_path(0.5, 0.0, 1, &[1.0], rng).unwrap()[0][0].abs())
        .unwrap();
    abs.sort_by(f64::total_cmp);
    let median = 0.5 * (abs[4999] + abs[5000]);
    let scale = c_alpha(0.5_f64).unwrap();
    // Sampling sd of the median is about scale·π/(2√N) ≈ 1.6% of scale.
    assert!((median / scale - 1.0).abs() < 0.05, "{median} vs {scale}");
}
