//! Gamma function via the Lanczos approximation (g = 7, n = 9).

use super::SpecfunError;
use crate::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x` that is not a non-positive integer.
pub fn gamma<T: Real>(x: T) -> Result<T, SpecfunError> {
    if x.is_nan() {
        return Err(SpecfunError::Domain { func: "gamma", arg: f64::NAN });
    }
    if x <= T::zero() && x == x.floor() {
        return Err(SpecfunError::Pole(x.as_f64()));
    }
    let g = gamma_unchecked(x);
    if g.is_infinite() {
        return Err(SpecfunError::Overflow(x.as_f64()));
    }
    Ok(g)
}

/// 1/Γ(x), continuous through the poles where it vanishes.
pub fn rgamma<T: Real>(x: T) -> T {
    if x <= T::zero() && x == x.floor() {
        return T::zero();
    }
    let g = gamma_unchecked(x);
    if g.is_infinite() {
        T::zero()
    } else {
        g.recip()
    }
}

pub(crate) fn gamma_unchecked<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma_unchecked(T::one() - x));
    }
    let z = x - T::one();
    let mut a = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a = a + T::lit(c) / (z + T::lit(i as f64));
    }
    let t = z + T::lit(LANCZOS_G) + half;
    // Split the power so t^(z+1/2) does not overflow before e^-t shrinks it.
    let p = t.powf((z + half) * half);
    (T::TAU()).sqrt() * p * (p * (-t).exp()) * a
}
