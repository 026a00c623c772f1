// SPDX-License-Identifier: Apache-2.0

//! Gamma, log-Gamma, reciprocal Gamma and digamma on the real line.

use crate::error::{Error, Result};
use std::f64::consts::PI;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// True when `x` is 0, -1, -2, ...
pub fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Γ(x) for real x; ±inf at the poles.
pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    // Small integers are exact factorials.
    if x == x.round() && x <= 23.0 {
        let mut f = 1.0;
        for k in 2..(x as u64) {
            f *= k as f64;
        }
        return f;
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    // Split the power to keep t^{y+1/2} finite up to x ~ 171.
    let half = t.powf(0.5 * (y + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(y)
}

/// 1/Γ(x), exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x < 30.0 {
        return gamma(x).ln();
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + lanczos_sum(y).ln()
}

/// Γ(x) for x > 0, the checked public entry point.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(gamma(x))
}

/// Digamma ψ(x) for real x away from the poles.
pub fn digamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 16.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // Asymptotic series with Bernoulli coefficients.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    acc + y.ln() - 0.5 * inv - series
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn reflection_branch() {
        // Γ(-1/2) = -2√π
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-14);
        assert_eq!(rgamma(-3.0), 0.0);
    }

    #[test]
    fn large_arguments() {
        // Γ(30) = 29!
        let f29 = 8_841_761_993_739_701_954_543_616_000_000.0_f64;
        assert!((gamma(30.0) / f29 - 1.0).abs() < 1e-13);
        assert!((gamma(29.5) / (ln_gamma(29.5)).exp() - 1.0).abs() < 1e-12);
        assert!((ln_gamma(100.0) - 359.134_205_369_575_4).abs() < 1e-11);
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-14, "{}", digamma(1.0));
        assert!((digamma(0.5) + euler + 2.0 * 2f64.ln()).abs() < 1e-14);
        // ψ(x+1) = ψ(x) + 1/x through the reflection branch
        let x = -0.3;
        assert!((digamma(x + 1.0) - digamma(x) - 1.0 / x).abs() < 1e-12);
    }
}
