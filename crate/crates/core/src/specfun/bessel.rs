//! Modified Bessel functions I_ν and K_ν for real order |ν| ≤ 2.
//!
//! Regimes for K_ν (after K_{-ν} = K_ν):
//!
//! | x            | method                                               |
//! |--------------|------------------------------------------------------|
//! | x ≤ 2        | reflection formula through the I_{±ν} series         |
//! | 2 < x ≤ 18   | trapezoid rule on ∫₀^∞ e^{-x cosh t} cosh(νt) dt       |
//! | x > 18       | Hankel asymptotic series                             |
//!
//! The reflection formula divides by sin(νπ); when |sin νπ| < 0.05 the
//! trapezoid rule is used for x ≤ 2 as well, so integer orders need no limit.
//! I_ν uses its power series up to 18 and the asymptotic series beyond.

use super::gamma::rgamma;
use super::SpecfunError;
use crate::Real;

/// Upper end of the series regime for I and lower end of the asymptotic regimes.
pub const ASYMPTOTIC_SWITCH: f64 = 18.0;
/// Upper end of the reflection-formula regime for K.
pub const REFLECTION_SWITCH: f64 = 2.0;
/// Below this |sin νπ| the reflection formula is not used.
pub const NEAR_INTEGER_SIN: f64 = 0.05;
const TRAPEZOID_STEP: f64 = 0.1;

/// Order of a Bessel function with the |ν| ≤ 2 range enforced.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder<T>(T);

impl<T: Real> BesselOrder<T> {
    pub fn new(nu: T) -> Result<Self, SpecfunError> {
        if nu.is_nan() || nu.abs() > T::lit(2.0) {
            return Err(SpecfunError::Order(nu.as_f64()));
        }
        Ok(Self(nu))
    }

    pub fn get(self) -> T {
        self.0
    }

    /// True when the reflection formula would divide by a small sin(νπ).
    pub fn near_integer(self) -> bool {
        (T::PI() * self.0).sin().abs() < T::lit(NEAR_INTEGER_SIN)
    }
}

fn check_arg<T: Real>(func: &'static str, x: T) -> Result<(), SpecfunError> {
    if x > T::zero() {
        Ok(())
    } else {
        Err(SpecfunError::Domain { func, arg: x.as_f64() })
    }
}

/// I_ν(x) for x > 0.
pub fn bessel_i<T: Real>(nu: T, x: T) -> Result<T, SpecfunError> {
    let order = BesselOrder::new(nu)?;
    check_arg("bessel_i", x)?;
    if x <= T::lit(ASYMPTOTIC_SWITCH) {
        return Ok(regimes::i_series(order.get(), x));
    }
    if x > T::max_value().ln() {
        return Err(SpecfunError::Overflow(x.as_f64()));
    }
    let v = regimes::i_asymptotic_scaled(order.get(), x) * x.exp();
    if v.is_infinite() {
        return Err(SpecfunError::Overflow(x.as_f64()));
    }
    Ok(v)
}

/// e^{-x} I_ν(x) for x > 0.
pub fn bessel_i_scaled<T: Real>(nu: T, x: T) -> Result<T, SpecfunError> {
    let order = BesselOrder::new(nu)?;
    check_arg("bessel_i_scaled", x)?;
    Ok(if x <= T::lit(ASYMPTOTIC_SWITCH) {
        regimes::i_series(order.get(), x) * (-x).exp()
    } else {
        regimes::i_asymptotic_scaled(order.get(), x)
    })
}

/// K_ν(x) for x > 0. Underflows to zero for very large x.
pub fn bessel_k<T: Real>(nu: T, x: T) -> Result<T, SpecfunError> {
    let s = bessel_k_scaled(nu, x)?;
    Ok(s * (-x).exp())
}

/// e^{x} K_ν(x) for x > 0.
pub fn bessel_k_scaled<T: Real>(nu: T, x: T) -> Result<T, SpecfunError> {
    let order = BesselOrder::new(nu)?;
    check_arg("bessel_k_scaled", x)?;
    let nu = order.get().abs();
    let order = BesselOrder(nu);
    Ok(if x > T::lit(ASYMPTOTIC_SWITCH) {
        regimes::k_asymptotic_scaled(nu, x)
    } else if x > T::lit(REFLECTION_SWITCH) || order.near_integer() {
        regimes::k_integral_scaled(nu, x)
    } else {
        regimes::k_reflection(nu, x) * x.exp()
    })
}

/// Evaluators for a single regime, exposed so the switch points can be
/// checked for consistency. They do no argument validation.
pub mod regimes {
    use super::*;

    /// Power series Σ (x/2)^{2n+ν} / (n! Γ(n+ν+1)).
    pub fn i_series<T: Real>(nu: T, x: T) -> T {
        let h = x * T::lit(0.5);
        let h2 = h * h;
        let eps = T::epsilon();
        let mut sum = T::zero();
        let mut n = 0usize;
        // Leading terms whose Γ(n+ν+1) sits at or left of a pole are summed
        // directly; the recurrence takes over once the argument is positive.
        let mut term;
        loop {
            let nf = T::lit(n as f64);
            term = h.powf(T::lit(2.0) * nf + nu) * rgamma(nf + T::one()) * rgamma(nf + nu + T::one());
            sum = sum + term;
            if nf + nu + T::one() > T::zero() {
                break;
            }
            n += 1;
        }
        loop {
            n += 1;
            let nf = T::lit(n as f64);
            term = term * h2 / (nf * (nf + nu));
            sum = sum + term;
            if term.abs() <= eps * sum.abs() || n > 1000 {
                break;
            }
        }
        sum
    }

    fn hankel_sum<T: Real>(nu: T, x: T, sign: T) -> T {
        let mu = T::lit(4.0) * nu * nu;
        let eight_x = T::lit(8.0) * x;
        let eps = T::epsilon();
        let mut term = T::one();
        let mut sum = T::one();
        for k in 1..200 {
            let kf = T::lit(k as f64);
            let odd = T::lit((2 * k - 1) as f64);
            let next = term * sign * (mu - odd * odd) / (kf * eight_x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum = sum + term;
            if term.abs() <= eps * sum.abs() {
                break;
            }
        }
        sum
    }

    /// e^{-x} I_ν(x) ~ (2πx)^{-1/2} Σ (-1)^k a_k(ν) / x^k.
    pub fn i_asymptotic_scaled<T: Real>(nu: T, x: T) -> T {
        hankel_sum(nu, x, -T::one()) / (T::TAU() * x).sqrt()
    }

    /// e^{x} K_ν(x) ~ (π/2x)^{1/2} Σ a_k(ν) / x^k.
    pub fn k_asymptotic_scaled<T: Real>(nu: T, x: T) -> T {
        hankel_sum(nu, x, T::one()) * (T::FRAC_PI_2() / x).sqrt()
    }

    /// K_ν = (π/2)(I_{-ν} − I_ν)/sin(νπ). Unusable at integer ν.
    pub fn k_reflection<T: Real>(nu: T, x: T) -> T {
        let s = (T::PI() * nu).sin();
        T::FRAC_PI_2() * (i_series(-nu, x) - i_series(nu, x)) / s
    }

    /// e^{x} K_ν(x) = ∫₀^∞ exp(-x(cosh t − 1)) cosh(νt) dt by the trapezoid
    /// rule, which converges geometrically for this analytic integrand.
    pub fn k_integral_scaled<T: Real>(nu: T, x: T) -> T {
        let nu = nu.abs();
        let h = T::lit(TRAPEZOID_STEP);
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let t_peak = (nu / x).asinh();
        let tiny = T::epsilon() * T::lit(1e-3);
        let mut sum = half;
        for k in 1..200_000 {
            let t = h * T::lit(k as f64);
            let sh = (t * half).sinh();
            let expo = -x * two * sh * sh + nu * t;
            let f = expo.exp() * half * (T::one() + (-two * nu * t).exp());
            sum = sum + f;
            if t > t_peak && f <= tiny * sum {
                break;
            }
        }
        sum * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Closed forms at half-integer order.
    fn k_half(x: f64) -> f64 {
        (std::f64::consts::FRAC_PI_2 / x).sqrt() * (-x).exp()
    }
    fn i_half(x: f64) -> f64 {
        (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sinh()
    }
    fn i_minus_half(x: f64) -> f64 {
        (2.0 / (std::f64::consts::PI * x)).sqrt() * x.cosh()
    }

    #[test]
    fn half_order_closed_forms() {
        let mut x = 1e-3;
        while x < 50.0 {
            assert!(rel(bessel_k(0.5, x).unwrap(), k_half(x)) < 1e-12, "K x={x}");
            assert!(rel(bessel_k(-0.5, x).unwrap(), k_half(x)) < 1e-12);
            if x < 40.0 {
                assert!(rel(bessel_i(0.5, x).unwrap(), i_half(x)) < 1e-12, "I x={x}");
                assert!(rel(bessel_i(-0.5, x).unwrap(), i_minus_half(x)) < 1e-12);
            }
            x *= 1.1;
        }
    }

    // Values computed with mpmath at 30 digits.
    #[test]
    fn reference_values() {
        let cases: [(f64, f64, f64); 6] = [
            (1.5, 2.0, 0.179_906_657_952_092_17),
            (0.0, 1.0, 0.421_024_438_240_708_33),
            (1.0, 0.5, 1.656_441_120_003_300_9),
            (2.0, 0.1, 199.503_964_642_114_12),
            (0.25, 20.0, 5.750_002_072_403_682_6e-10),
            (0.75, 3.0, 0.037_696_423_405_926_79),
        ];
        for (nu, x, k) in cases {
            assert!(rel(bessel_k(nu, x).unwrap(), k) < 1e-12, "nu={nu} x={x}");
        }
        assert!(rel(bessel_i(0.0, 1.0).unwrap(), 1.266_065_877_752_008_4) < 1e-14);
        assert!(rel(bessel_i(1.25, 25.0).unwrap(), 5.593_278_207_589_167_6e9) < 1e-12);
    }

    #[test]
    fn k_is_even_in_order() {
        for &x in &[0.01, 1.0, 5.0, 30.0] {
            for &nu in &[0.1, 0.75, 1.3, 2.0] {
                assert_eq!(bessel_k(nu, x).unwrap(), bessel_k(-nu, x).unwrap());
            }
        }
    }

    #[test]
    fn near_integer_orders_are_continuous() {
        for &x in &[0.001, 0.3, 1.9] {
            for &n in &[0.0, 1.0, 2.0_f64] {
                let at = bessel_k(n, x).unwrap();
                let off = bessel_k((n - 1e-7).abs(), x).unwrap();
                assert!(rel(off, at) < 1e-5, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn regime_switches_agree() {
        for &nu in &[0.1, 0.25, 0.5, 0.75, 1.25, 1.75_f64] {
            for &x in &[1.9, 2.0, 2.1_f64] {
                let a = regimes::k_reflection(nu, x) * x.exp();
                let b = regimes::k_integral_scaled(nu, x);
                assert!(rel(a, b) < 1e-9, "nu={nu} x={x}");
            }
        }
        for &nu in &[0.0, 0.25, 0.5, 1.0, 1.5, 2.0] {
            for &x in &[17.0, 18.0, 19.0_f64] {
                let a = regimes::k_integral_scaled(nu, x);
                let b = regimes::k_asymptotic_scaled(nu, x);
                assert!(rel(a, b) < 1e-9, "nu={nu} x={x}");
                let c = regimes::i_series(nu, x) * (-x).exp();
                let d = regimes::i_asymptotic_scaled(nu, x);
                assert!(rel(c, d) < 1e-9, "I nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel_k(0.5, 0.0), Err(SpecfunError::Domain { .. })));
        assert!(matches!(bessel_k(0.5, -1.0), Err(SpecfunError::Domain { .. })));
        assert!(matches!(bessel_k(2.5, 1.0), Err(SpecfunError::Order(_))));
        assert!(matches!(bessel_i(0.5, 800.0), Err(SpecfunError::Overflow(_))));
        assert!(bessel_i_scaled(0.5_f64, 800.0).unwrap().is_finite());
        assert_eq!(bessel_k(0.5, 800.0).unwrap(), 0.0);
    }

    #[test]
    fn single_precision_agrees() {
        for &x in &[0.05_f32, 1.0, 3.0, 25.0] {
            let k32 = bessel_k(0.25_f32, x).unwrap() as f64;
            let k64 = bessel_k(0.25_f64, x as f64).unwrap();
            assert!(rel(k32, k64) < 1e-5);
        }
    }
}
