// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The problem quadruple (N, α, p, q).
///
/// [`Params::new`] is the admissibility gate for the whole crate; the derived
/// exponents are only meaningful on validated values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl Params {
    pub fn new(n: usize, alpha: f64, p: f64, q: f64) -> Result<Self> {
        let params = Params { n, alpha, p, q };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |violated: &str| {
            Err(Error::Inadmissible {
                violated: violated.to_string(),
                detail: format!("N={}, α={}, p={}, q={}", self.n, self.alpha, self.p, self.q),
            })
        };
        if self.n == 0 {
            return fail("N < 1");
        }
        if !(self.alpha.is_finite() && self.p.is_finite() && self.q.is_finite()) {
            return fail("non-finite exponent");
        }
        let nf = self.n as f64;
        if self.alpha <= 0.0 {
            return fail("α ≤ 0");
        }
        if self.alpha >= nf {
            return fail("α ≥ N");
        }
        if self.p <= (nf + self.alpha) / nf {
            return fail("p ≤ (N+α)/N");
        }
        if self.q <= 2.0 * nf * self.p / (nf + self.alpha) {
            return fail("q ≤ 2Np/(N+α)");
        }
        Ok(())
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// θ = ((N+α)q − 2Np)/(Np(q−2)), in (0, 1) for admissible values.
    pub fn theta(&self) -> f64 {
        let nf = self.dim();
        ((nf + self.alpha) * self.q - 2.0 * nf * self.p) / (nf * self.p * (self.q - 2.0))
    }

    /// ν = (2(2p+α) − q(2+α))/(α(q−2)), the weight exponent of ε in the
    /// rescaled regularized problem.
    pub fn nu(&self) -> f64 {
        (2.0 * (2.0 * self.p + self.alpha) - self.q * (2.0 + self.alpha))
            / (self.alpha * (self.q - 2.0))
    }

    /// λ* = ((p−2)/(q−p))^{1/(q−2)}, the minimizer of t^{2−p} + t^{q−p}.
    pub fn lambda_star(&self) -> Result<f64> {
        if self.p < 2.0 {
            return Err(Error::Domain(format!(
                "λ* is defined for p ≥ 2 only (p = {})",
                self.p
            )));
        }
        Ok(((self.p - 2.0) / (self.q - self.p)).powf(1.0 / (self.q - 2.0)))
    }

    /// Boundary value at which a compactly supported solution lies on the
    /// Pohožaev manifold: (q(p−2)/(2(q−p)))^{1/(q−2)}; zero for p = 2.
    pub fn lambda_pohozaev(&self) -> Result<f64> {
        if self.p < 2.0 {
            return Err(Error::Domain(format!(
                "boundary jump is defined for p ≥ 2 only (p = {})",
                self.p
            )));
        }
        Ok((self.q * (self.p - 2.0) / (2.0 * (self.q - self.p))).powf(1.0 / (self.q - 2.0)))
    }

    /// Algebraic decay exponent (N−α)/(2−p) of full-support solutions.
    pub fn decay_exponent(&self) -> Result<f64> {
        if self.p >= 2.0 {
            return Err(Error::Domain(format!(
                "algebraic decay applies to p < 2 only (p = {})",
                self.p
            )));
        }
        Ok((self.dim() - self.alpha) / (2.0 - self.p))
    }

    /// (N, α, p, q) lies on the explicit family p = (N+α+2)/(N+1),
    /// q = 2(N+2)/(N+1), up to `tol`.
    pub fn on_explicit_family(&self, tol: f64) -> bool {
        let (pe, qe) = explicit_family_exponents(self.n, self.alpha);
        (self.p - pe).abs() <= tol && (self.q - qe).abs() <= tol
    }

    /// Same quadruple with a different α (not validated).
    pub fn with_alpha(&self, alpha: f64) -> Params {
        Params { alpha, ..*self }
    }

    /// Bit pattern used as a cache key.
    pub(crate) fn key(&self) -> [u64; 4] {
        [self.n as u64, self.alpha.to_bits(), self.p.to_bits(), self.q.to_bits()]
    }
}

/// (p, q) of the explicit family for given (N, α).
pub fn explicit_family_exponents(n: usize, alpha: f64) -> (f64, f64) {
    let nf = n as f64;
    ((nf + alpha + 2.0) / (nf + 1.0), 2.0 * (nf + 2.0) / (nf + 1.0))
}
