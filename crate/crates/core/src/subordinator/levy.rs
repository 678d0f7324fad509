//! Lévy densities on (0, ∞) and their tails.

use super::{Mass, StableIndex, SubordinatorError};
use crate::quad::Integrator;
use crate::specfun::gamma;
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum LevyDensity<T> {
    /// c_α t^{−1−α}
    Stable { alpha: StableIndex<T> },
    /// c_α t^{−1−α} e^{−mt}
    RelativisticStable { alpha: StableIndex<T>, mass: Mass<T> },
    /// first − second
    Difference(Box<LevyDensity<T>>, Box<LevyDensity<T>>),
}

impl<T: Real> LevyDensity<T> {
    pub fn stable(alpha: T) -> Result<Self, SubordinatorError> {
        Ok(Self::Stable { alpha: StableIndex::new(alpha)? })
    }

    pub fn relativistic(alpha: T, m: T) -> Result<Self, SubordinatorError> {
        Ok(Self::RelativisticStable { alpha: StableIndex::new(alpha)?, mass: Mass::new(m)? })
    }

    /// ν^(α) − ν^(α,m), the density behind the trace-process difference j.
    pub fn stable_minus_relativistic(alpha: T, m: T) -> Result<Self, SubordinatorError> {
        Ok(Self::Difference(Box::new(Self::stable(alpha)?), Box::new(Self::relativistic(alpha, m)?)))
    }

    pub fn eval(&self, t: T) -> Result<T, SubordinatorError> {
        if !(t > T::zero()) {
            return Err(SubordinatorError::Negative(t.as_f64()));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: T) -> T {
        match self {
            Self::Stable { alpha } => alpha.c() * t.powf(-T::one() - alpha.get()),
            Self::RelativisticStable { alpha, mass } => {
                alpha.c() * t.powf(-T::one() - alpha.get()) * (-mass.get() * t).exp()
            }
            Self::Difference(a, b) => {
                if let (Self::Stable { alpha: a1 }, Self::RelativisticStable { alpha: a2, mass }) = (&**a, &**b) {
                    if a1 == a2 {
                        // c t^{−1−α}(1 − e^{−mt}) without cancellation.
                        return -a1.c() * t.powf(-T::one() - a1.get()) * (-mass.get() * t).exp_m1();
                    }
                }
                a.eval_unchecked(t) - b.eval_unchecked(t)
            }
        }
    }

    /// ν((s, ∞)).
    pub fn tail(&self, s: T) -> Result<T, SubordinatorError> {
        if !(s > T::zero()) {
            return Err(SubordinatorError::Negative(s.as_f64()));
        }
        match self {
            Self::Stable { alpha } => Ok(s.powf(-alpha.get()) / gamma(T::one() - alpha.get())?),
            Self::RelativisticStable { mass, .. } if mass.get() == T::zero() => {
                let a = self.alpha_index();
                Ok(s.powf(-a) / gamma(T::one() - a)?)
            }
            Self::RelativisticStable { .. } => {
                // t = s e^v
                let q = Integrator::default();
                let e = q.finite(
                    |v: T| {
                        let t = s * v.exp();
                        self.eval_unchecked(t) * t
                    },
                    T::zero(),
                    T::lit(150.0),
                )?;
                Ok(e.value)
            }
            Self::Difference(a, b) => Ok(a.tail(s)? - b.tail(s)?),
        }
    }

    fn alpha_index(&self) -> T {
        match self {
            Self::Stable { alpha } | Self::RelativisticStable { alpha, .. } => alpha.get(),
            Self::Difference(a, _) => a.alpha_index(),
        }
    }

    /// ∫₀^∞ (1 − e^{−λt}) ν(t) dt by quadrature.
    pub fn laplace_integral(&self, lambda: T) -> Result<T, SubordinatorError> {
        if !(lambda >= T::zero()) {
            return Err(SubordinatorError::Negative(lambda.as_f64()));
        }
        if lambda == T::zero() {
            return Ok(T::zero());
        }
        let q = Integrator::default();
        let e = q.positive_axis(|t| -(-lambda * t).exp_m1() * self.eval_unchecked(t), lambda.recip())?;
        Ok(e.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subordinator::LaplaceExponent;

    #[test]
    fn examples() {
        let c = 0.5 / std::f64::consts::PI.sqrt();
        let s = LevyDensity::stable(0.5).unwrap();
        assert!((s.eval(1.0).unwrap() - c).abs() < 1e-15);
        assert!((s.tail(1.0).unwrap() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!(matches!(s.eval(0.0), Err(SubordinatorError::Negative(_))));
        let r = LevyDensity::relativistic(0.5, 1.0).unwrap();
        assert!((r.eval(1.0).unwrap() - c * (-1.0_f64).exp()).abs() < 1e-15);
    }

    // Closed form: ∫_s^∞ c t^{−3/2} e^{−t} dt = 2c (e^{−s}/√s − √π erfc(√s)).
    #[test]
    fn relativistic_tail_half() {
        let c = 0.5 / std::f64::consts::PI.sqrt();
        let r = LevyDensity::relativistic(0.5, 1.0).unwrap();
        // erfc(1) from mpmath
        let erfc1 = 0.157_299_207_050_285_13;
        let expect = 2.0 * c * ((-1.0_f64).exp() - std::f64::consts::PI.sqrt() * erfc1);
        assert!((r.tail(1.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn difference_has_no_cancellation() {
        let d = LevyDensity::stable_minus_relativistic(0.5, 1.0).unwrap();
        let t = 1e-12_f64;
        let expect = 0.5 / std::f64::consts::PI.sqrt() * t.powf(-1.5) * 1e-12;
        assert!(((d.eval(t).unwrap() - expect) / expect).abs() < 1e-9);
    }

    // With the density normalised by c_α the Laplace integral gives λ^α;
    // the exponent carries a further factor c_α.
    #[test]
    fn laplace_integral_against_exponent() {
        for &a in &[0.25, 0.5, 0.75] {
            for &(m, l) in &[(0.0, 0.3), (1.0, 2.0), (4.0, 0.5)] {
                let nu = LevyDensity::<f64>::relativistic(a, m).unwrap();
                let phi = LaplaceExponent::relativistic(a, m).unwrap();
                let c = crate::specfun::c_alpha(a).unwrap();
                let lhs = c * nu.laplace_integral(l).unwrap();
                let rhs = phi.eval(l).unwrap();
                assert!(((lhs - rhs) / rhs).abs() < 1e-6, "a={a} m={m} l={l}");
            }
        }
    }
}
