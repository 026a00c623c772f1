// SPDX-License-Identifier: Apache-2.0

//! Gauss hypergeometric function 2F1(a, b; c; z) for real parameters and
//! z in [0, 1].
//!
//! Power series for z ≤ 1/2, the linear transformation z → 1 − z above that
//! (with the logarithmic forms when c − a − b is an integer), and Gauss
//! summation at z = 1.

use super::gamma::{digamma, gamma, is_nonpositive_integer, rgamma};
use crate::error::{Error, Result};

const MAX_TERMS: usize = 100_000;
const SERIES_TOL: f64 = 1e-17;
/// Distance of c − a − b from an integer below which the log forms are used.
const INTEGER_GAP: f64 = 1e-9;

/// 2F1(a, b; c; z) for z in [0, 1].
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_split(a, b, c, z, 1.0 - z)
}

/// Same as [`hyp2f1`], with `w = 1 − z` supplied by the caller.
///
/// Kernel evaluations near the diagonal know `1 − z` to full relative
/// precision while `z` itself has rounded to 1.
pub fn hyp2f1_split(a: f64, b: f64, c: f64, z: f64, w: f64) -> Result<f64> {
    Hyp2f1::new(a, b, c)?.eval(z, w)
}

/// 2F1 with fixed (a, b, c), caching the Gamma prefactors of the z → 1 − z
/// transformation for repeated evaluation.
#[derive(Clone, Copy, Debug)]
pub struct Hyp2f1 {
    a: f64,
    b: f64,
    c: f64,
    m: f64,
    terminating: bool,
    log_form: Option<i64>,
    front: f64,
    back: f64,
}

impl Hyp2f1 {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if is_nonpositive_integer(c) {
            return Err(Error::Domain(format!("2F1 undefined for c = {c}")));
        }
        let m = c - a - b;
        let mi = m.round();
        let log_form = ((m - mi).abs() < INTEGER_GAP).then_some(mi as i64);
        let (front, back) = if log_form.is_some() {
            (0.0, 0.0)
        } else {
            (
                gamma(c) * gamma(m) * rgamma(c - a) * rgamma(c - b),
                gamma(c) * gamma(-m) * rgamma(a) * rgamma(b),
            )
        };
        Ok(Hyp2f1 {
            a,
            b,
            c,
            m,
            terminating: is_nonpositive_integer(a) || is_nonpositive_integer(b),
            log_form,
            front,
            back,
        })
    }

    /// Value at z with w = 1 − z supplied separately.
    pub fn eval(&self, z: f64, w: f64) -> Result<f64> {
        let (a, b, c, m) = (self.a, self.b, self.c, self.m);
        if !(0.0..=1.0).contains(&z) || w < 0.0 {
            return Err(Error::Domain(format!("2F1 implemented for z in [0,1], got {z}")));
        }
        if z == 0.0 {
            return Ok(1.0);
        }
        if self.terminating {
            return Ok(terminating(a, b, c, z));
        }
        if w == 0.0 {
            if m <= 0.0 {
                return Err(Error::KernelSingular(format!(
                    "2F1 diverges at z = 1 with c - a - b = {m}"
                )));
            }
            return Ok(gamma(c) * gamma(m) * rgamma(c - a) * rgamma(c - b));
        }
        if z <= 0.5 {
            return Ok(series(a, b, c, z));
        }
        Ok(match self.log_form {
            Some(mi) => integer_gap(a, b, c, mi, w),
            None => {
                self.front * series(a, b, 1.0 - m, w)
                    + w.powf(m) * self.back * series(c - a, c - b, m + 1.0, w)
            }
        })
    }
}

/// Plain power series; converges for |z| < 1, used for |z| ≤ 1/2.
pub(crate) fn series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            break;
        }
        if term.abs() < SERIES_TOL * sum.abs() {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum
}

fn terminating(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let order = if is_nonpositive_integer(a) && is_nonpositive_integer(b) {
        (-a).min(-b)
    } else if is_nonpositive_integer(a) {
        -a
    } else {
        -b
    } as usize;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..order {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
    }
    sum
}

/// Logarithmic connection formulas for c = a + b + m with integer m.
fn integer_gap(a: f64, b: f64, c: f64, m: i64, w: f64) -> f64 {
    let lnw = w.ln();
    if m == 0 {
        let pref = gamma(c) * rgamma(a) * rgamma(b);
        let mut sum = 0.0;
        let mut coef = 1.0; // (a)_n (b)_n / (n!)^2 w^n
        for n in 0..MAX_TERMS {
            let nf = n as f64;
            let t = coef
                * (2.0 * digamma(nf + 1.0) - digamma(a + nf) - digamma(b + nf) - lnw);
            sum += t;
            if n > 2 && t.abs() < SERIES_TOL * sum.abs() {
                break;
            }
            coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + 1.0)) * w;
            if coef == 0.0 {
                break;
            }
        }
        return pref * sum;
    }
    if m > 0 {
        let mu = m as usize;
        let mf = m as f64;
        // Finite part.
        let mut finite = 0.0;
        let mut coef = 1.0; // (a)_n (b)_n / (n! (1-m)_n) w^n
        for n in 0..mu {
            finite += coef;
            let nf = n as f64;
            coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
        }
        finite *= gamma(mf) * gamma(c) * rgamma(a + mf) * rgamma(b + mf);
        // Logarithmic part: -(z-1)^m Γ(c)/(Γ(a)Γ(b)) Σ ... ; (z-1)^m = (-w)^m.
        let sign = if mu.is_multiple_of(2) { 1.0 } else { -1.0 };
        let pref = -sign * w.powi(m as i32) * gamma(c) * rgamma(a) * rgamma(b);
        let mut sum = 0.0;
        let mut coef = 1.0 / factorial(mu); // (a+m)_n (b+m)_n / (n! (n+m)!) w^n
        for n in 0..MAX_TERMS {
            let nf = n as f64;
            let t = coef
                * (lnw - digamma(nf + 1.0) - digamma(nf + mf + 1.0)
                    + digamma(a + nf + mf)
                    + digamma(b + nf + mf));
            sum += t;
            if n > 2 && t.abs() < SERIES_TOL * sum.abs() {
                break;
            }
            coef *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
            if coef == 0.0 {
                break;
            }
        }
        return finite + pref * sum;
    }
    // m < 0: c = a + b - k with k > 0.
    let k = (-m) as usize;
    let kf = k as f64;
    let mut finite = 0.0;
    let mut coef = 1.0; // (a-k)_n (b-k)_n / (n! (1-k)_n) w^n
    for n in 0..k {
        finite += coef;
        let nf = n as f64;
        coef *= (a - kf + nf) * (b - kf + nf) / ((nf + 1.0) * (1.0 - kf + nf)) * w;
    }
    finite *= gamma(kf) * gamma(c) * rgamma(a) * rgamma(b) * w.powf(-kf);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pref = -sign * gamma(c) * rgamma(a - kf) * rgamma(b - kf);
    let mut sum = 0.0;
    let mut coef = 1.0 / factorial(k); // (a)_n (b)_n / (n! (n+k)!) w^n
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let t = coef
            * (lnw - digamma(nf + 1.0) - digamma(nf + kf + 1.0) + digamma(a + nf) + digamma(b + nf));
        sum += t;
        if n > 2 && t.abs() < SERIES_TOL * sum.abs() {
            break;
        }
        coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + kf + 1.0)) * w;
        if coef == 0.0 {
            break;
        }
    }
    finite + pref * sum
}

fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: direct summation with a geometric remainder bound.
    fn direct(a: f64, b: f64, c: f64, z: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 0.0;
        loop {
            let ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
            term *= ratio;
            sum += term;
            n += 1.0;
            if n > 50.0 && ratio.abs() < 1.0 && term.abs() / (1.0 - ratio.abs()) < 1e-16 * sum.abs() {
                return sum;
            }
            if n > 2.0e6 {
                return sum;
            }
        }
    }

    fn rel(x: f64, y: f64) -> f64 {
        (x - y).abs() / y.abs().max(1e-300)
    }

    #[test]
    fn zero_argument() {
        assert_eq!(hyp2f1(0.3, -2.7, 1.4, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn ball_parameters_quarter() {
        // (-α/2, (N-α)/2; N/2; z) at N=3, α=2 terminates: 1 - z/3.
        let v = hyp2f1(-1.0, 0.5, 1.5, 0.25).unwrap();
        assert!(rel(v, 1.0 - 0.25 / 3.0) < 1e-15);
        assert!(rel(v, direct(-1.0, 0.5, 1.5, 0.25)) < 1e-15);
    }

    #[test]
    fn connection_branches_match_series() {
        let cases = [
            (0.3, 0.7, 1.9, 0.8),    // non-integer gap
            (0.25, 0.75, 1.0, 0.7),  // m = 0
            (0.25, 0.75, 2.0, 0.85), // m = 1
            (0.4, 0.9, 3.3, 0.9),    // m = 2
            (1.25, 0.75, 1.0, 0.6),  // m = -1
            (1.5, 1.2, 0.7, 0.75),   // m = -2
            (-0.25, 1.25, 1.5, 0.9),
            (-0.75, 0.25, 1.0, 0.95),
        ];
        for (a, b, c, z) in cases {
            let got = hyp2f1(a, b, c, z).unwrap();
            let want = direct(a, b, c, z);
            assert!(rel(got, want) < 1e-11, "({a},{b},{c},{z}): {got} vs {want}");
        }
    }

    #[test]
    fn gauss_summation_limit() {
        let (a, b, c) = (-0.25, 1.25, 1.5);
        let at_one = hyp2f1(a, b, c, 1.0).unwrap();
        let want = gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b));
        assert!(rel(at_one, want) < 1e-14);
        let near = hyp2f1_split(a, b, c, 1.0 - 1e-14, 1e-14).unwrap();
        assert!(rel(near, want) < 1e-6);
    }

    #[test]
    fn divergent_at_one_is_flagged() {
        assert!(matches!(
            hyp2f1(0.5, 0.75, 1.0, 1.0),
            Err(Error::KernelSingular(_))
        ));
        assert!(hyp2f1(0.5, 0.75, 1.0, 0.999_999).is_ok());
    }
}
