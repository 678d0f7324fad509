//! Special functions: Γ, modified Bessel functions, and the Bessel-derived
//! quantities that drive the relativistic Bessel diffusion.

mod bessel;
mod gamma;

pub use bessel::{
    bessel_i, bessel_i_scaled, bessel_k, bessel_k_scaled, regimes, BesselOrder, ASYMPTOTIC_SWITCH,
    NEAR_INTEGER_SIN, REFLECTION_SWITCH,
};
pub use gamma::{gamma, rgamma};

use thiserror::Error;

use crate::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("gamma has a pole at {0}")]
    Pole(f64),
    #[error("{func}: argument {arg} outside the domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("Bessel order {0} outside |nu| <= 2")]
    Order(f64),
    #[error("result overflows at x = {0}")]
    Overflow(f64),
}

fn check_alpha<T: Real>(alpha: T) -> Result<(), SpecfunError> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(SpecfunError::Domain { func: "alpha", arg: alpha.as_f64() })
    }
}

fn check_mass<T: Real>(m: T) -> Result<(), SpecfunError> {
    if m >= T::zero() && m.is_finite() {
        Ok(())
    } else {
        Err(SpecfunError::Domain { func: "mass", arg: m.as_f64() })
    }
}

/// c_α = α / Γ(1 − α).
pub fn c_alpha<T: Real>(alpha: T) -> Result<T, SpecfunError> {
    check_alpha(alpha)?;
    Ok(alpha / gamma(T::one() - alpha)?)
}

/// x^α K_α(x), extended continuously by 2^{α−1} Γ(α) at x = 0.
pub fn khat<T: Real>(alpha: T, x: T) -> Result<T, SpecfunError> {
    check_alpha(alpha)?;
    if x < T::zero() || x.is_nan() {
        return Err(SpecfunError::Domain { func: "khat", arg: x.as_f64() });
    }
    if x == T::zero() {
        return khat_at_zero(alpha);
    }
    Ok(x.powf(alpha) * bessel_k(alpha, x)?)
}

fn khat_at_zero<T: Real>(alpha: T) -> Result<T, SpecfunError> {
    Ok(T::lit(2.0).powf(alpha - T::one()) * gamma(alpha)?)
}

/// ρ_m(x) = khat(√(2m) x) / khat(0), the decreasing solution of
/// ½ρ″ + ((1−2α)/2x) ρ′ = mρ with ρ(0) = 1.
pub fn rho_m<T: Real>(alpha: T, m: T, x: T) -> Result<T, SpecfunError> {
    check_alpha(alpha)?;
    check_mass(m)?;
    if x < T::zero() || x.is_nan() {
        return Err(SpecfunError::Domain { func: "rho_m", arg: x.as_f64() });
    }
    if m == T::zero() || x == T::zero() {
        return Ok(T::one());
    }
    let z = (T::lit(2.0) * m).sqrt() * x;
    Ok(khat(alpha, z)? / khat_at_zero(alpha)?)
}

/// ρ′_m/ρ_m(x) = −√(2m) K_{α−1}(z)/K_α(z) with z = √(2m) x.
///
/// Computed from exponentially scaled K so it stays finite for large z.
pub fn drift_ratio<T: Real>(alpha: T, m: T, x: T) -> Result<T, SpecfunError> {
    check_alpha(alpha)?;
    check_mass(m)?;
    if !(x > T::zero()) {
        return Err(SpecfunError::Domain { func: "drift_ratio", arg: x.as_f64() });
    }
    if m == T::zero() {
        return Ok(T::zero());
    }
    let s = (T::lit(2.0) * m).sqrt();
    let z = s * x;
    Ok(-s * bessel_k_scaled(alpha - T::one(), z)? / bessel_k_scaled(alpha, z)?)
}

/// Which end of (0, ∞) an asymptote describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Zero,
    Infinity,
}

/// Leading behaviour of the drift ratio: `coefficient · x^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptote<T> {
    pub coefficient: T,
    pub power: T,
}

impl<T: Real> Asymptote<T> {
    pub fn eval(&self, x: T) -> T {
        self.coefficient * x.powf(self.power)
    }
}

/// Near zero: −(m^α Γ(1−α) / (2^{α−1} Γ(α))) x^{2α−1}. At infinity: −√(2m).
pub fn drift_ratio_asymptotic<T: Real>(alpha: T, m: T, regime: Regime) -> Result<Asymptote<T>, SpecfunError> {
    check_alpha(alpha)?;
    check_mass(m)?;
    Ok(match regime {
        Regime::Zero => Asymptote {
            coefficient: -m.powf(alpha) * gamma(T::one() - alpha)? / khat_at_zero(alpha)?,
            power: T::lit(2.0) * alpha - T::one(),
        },
        Regime::Infinity => Asymptote {
            coefficient: -(T::lit(2.0) * m).sqrt(),
            power: T::zero(),
        },
    })
}

/// Transition density of the Bessel process of index −α, with respect to
/// the speed measure 2y^{1−2α} dy:
///
/// p(t,x,y) = (xy)^α/(2t) · exp(−(x²+y²)/2t) · I_{−α}(xy/t).
///
/// Evaluated through the power series of (xy)^α I_{−α} for small xy/t (which
/// also covers x = 0 or y = 0) and through scaled I otherwise.
pub fn bessel_transition_density<T: Real>(alpha: T, t: T, x: T, y: T) -> Result<T, SpecfunError> {
    check_alpha(alpha)?;
    if !(t > T::zero()) {
        return Err(SpecfunError::Domain { func: "transition_density", arg: t.as_f64() });
    }
    if x < T::zero() || y < T::zero() || x.is_nan() || y.is_nan() {
        return Err(SpecfunError::Domain { func: "transition_density", arg: x.min(y).as_f64() });
    }
    let two_t = T::lit(2.0) * t;
    let z = x * y / t;
    if z < T::one() {
        // (xy)^α I_{−α}(z) = (2t)^α Σ (z/2)^{2n} / (n! Γ(n+1−α))
        let q = z * z * T::lit(0.25);
        let mut term = rgamma(T::one() - alpha);
        let mut sum = term;
        let mut n = 0;
        loop {
            n += 1;
            let nf = T::lit(n as f64);
            term = term * q / (nf * (nf - alpha));
            sum = sum + term;
            if term.abs() <= T::epsilon() * sum.abs() || n > 200 {
                break;
            }
        }
        Ok(two_t.powf(alpha) / two_t * (-(x * x + y * y) / two_t).exp() * sum)
    } else {
        let d = x - y;
        Ok((x * y).powf(alpha) / two_t * (-d * d / two_t).exp() * bessel_i_scaled(-alpha, z)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];
    const MASSES: [f64; 3] = [0.5, 1.0, 4.0];

    #[test]
    fn c_alpha_half() {
        let c = c_alpha(0.5_f64).unwrap();
        assert!((c - 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        // 0.25/Γ(0.75), mpmath.
        assert!((c_alpha(0.25_f64).unwrap() - 0.204_012_234_774_565_75).abs() < 1e-14);
        assert!(c_alpha(1.0_f64).is_err());
        assert!(c_alpha(0.0_f64).is_err());
    }

    #[test]
    fn khat_limit_at_zero() {
        let k0 = khat(0.5_f64, 0.0).unwrap();
        assert!((k0 - std::f64::consts::FRAC_PI_2.sqrt()).abs() < 1e-14);
        for &a in &ALPHAS {
            let at0 = khat(a, 0.0).unwrap();
            let near = khat(a, 1e-9).unwrap();
            assert!(((near - at0) / at0).abs() < 1e-3, "alpha={a}");
        }
    }

    #[test]
    fn rho_half_is_exponential() {
        for &m in &MASSES {
            for &x in &[0.0, 0.1, 1.0, 5.0] {
                let r = rho_m(0.5, m, x).unwrap();
                let e = (-(2.0_f64 * m).sqrt() * x).exp();
                assert!((r - e).abs() < 1e-13 * e.max(1e-300) + 1e-300);
            }
        }
        assert_eq!(rho_m(0.3, 0.0, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn rho_is_decreasing() {
        for &a in &ALPHAS {
            let mut prev = 1.0;
            let mut x = 1e-3;
            while x < 20.0 {
                let r = rho_m(a, 1.0, x).unwrap();
                assert!(r < prev && r > 0.0);
                prev = r;
                x *= 1.3;
            }
        }
    }

    #[test]
    fn drift_ratio_half_is_constant() {
        for &x in &[1e-4, 0.5, 3.0, 100.0_f64] {
            assert!((drift_ratio(0.5, 2.0, x).unwrap() + 2.0_f64).abs() < 1e-13);
        }
        let z = drift_ratio_asymptotic(0.5_f64, 2.0, Regime::Zero).unwrap();
        assert!((z.coefficient + 2.0).abs() < 1e-13 && z.power == 0.0);
        let i = drift_ratio_asymptotic(0.5_f64, 2.0, Regime::Infinity).unwrap();
        assert!((i.coefficient + 2.0).abs() < 1e-15);
    }

    #[test]
    fn drift_ratio_tends_to_asymptotes() {
        for &a in &ALPHAS {
            for &m in &MASSES {
                let z = drift_ratio_asymptotic(a, m, Regime::Zero).unwrap();
                let gap = |x: f64| (drift_ratio(a, m, x).unwrap() / z.eval(x) - 1.0).abs();
                if a != 0.5 {
                    assert!(gap(1e-5) < gap(1e-4) && gap(1e-4) < gap(1e-3));
                } else {
                    assert!(gap(1e-4) < 1e-13);
                }
                let inf = drift_ratio_asymptotic(a, m, Regime::Infinity).unwrap();
                let far = drift_ratio(a, m, 1e4).unwrap() / inf.coefficient;
                assert!((far - 1.0).abs() < 1e-4);
            }
        }
    }

    // The ratio r = ρ′/ρ solves the Riccati equation r′ = 2m − (1−2α)r/x − r².
    #[test]
    fn drift_ratio_solves_riccati() {
        for &a in &ALPHAS {
            for &m in &MASSES {
                let mut x = 0.05;
                while x < 10.0 {
                    let h = 1e-5 * x;
                    let d = (drift_ratio(a, m, x + h).unwrap() - drift_ratio(a, m, x - h).unwrap()) / (2.0 * h);
                    let r = drift_ratio(a, m, x).unwrap();
                    let rhs = 2.0 * m - (1.0 - 2.0 * a) * r / x - r * r;
                    assert!((d - rhs).abs() < 1e-6 * (1.0 + rhs.abs()), "a={a} m={m} x={x}");
                    x *= 1.7;
                }
            }
        }
    }

    #[test]
    fn transition_density_half_is_reflected_gaussian() {
        // α = 1/2: density of |B| w.r.t. 2 dy.
        let g = |t: f64, x: f64, y: f64| {
            let n = |u: f64| (-u * u / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
            (n(x - y) + n(x + y)) / 2.0
        };
        for &(t, x, y) in &[(0.5, 0.0, 0.3), (1.0, 0.2, 0.7), (0.1, 1.0, 1.2), (2.0, 3.0, 0.5)] {
            let p = bessel_transition_density(0.5, t, x, y).unwrap();
            assert!((p - g(t, x, y)).abs() < 1e-13, "t={t} x={x} y={y}");
        }
    }

    #[test]
    fn transition_density_is_symmetric_and_continuous() {
        for &a in &ALPHAS {
            let p = bessel_transition_density(a, 0.7, 0.4, 1.3).unwrap();
            let q = bessel_transition_density(a, 0.7, 1.3, 0.4).unwrap();
            assert!(((p - q) / p).abs() < 1e-13);
            // Series and scaled-I branches meet at xy/t = 1.
            let lo = bessel_transition_density(a, 1.0, 1.0, 1.0 - 1e-12).unwrap();
            let hi = bessel_transition_density(a, 1.0, 1.0, 1.0 + 1e-12).unwrap();
            assert!(((lo - hi) / lo).abs() < 1e-10);
            let at0 = bessel_transition_density(a, 1.0, 0.0, 0.5).unwrap();
            let expect = 2.0_f64.powf(a) / 2.0 * (-0.125_f64).exp() / gamma(1.0 - a).unwrap();
            assert!(((at0 - expect) / expect).abs() < 1e-13);
        }
    }
}
