// SPDX-License-Identifier: Apache-2.0

//! Special functions and the named constants of the problem.

mod gamma;
mod hyp2f1;
mod params;

pub use gamma::{digamma, gamma, gamma_fn, ln_gamma, rgamma};
pub use hyp2f1::{hyp2f1, hyp2f1_split, Hyp2f1};
pub use params::{explicit_family_exponents, Params};

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Result;

/// N − α below which the raw A_α and 𝒞_{N,α} are flagged ill-conditioned.
pub const ILL_CONDITIONED_GAP: f64 = 1e-5;

/// Every named constant for one [`Params`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedConstants {
    pub riesz_a: f64,
    pub hls_c: f64,
    /// 𝒞_{N,α}/A_α through the cancelled Gamma form; stays finite as α → N.
    pub hls_over_riesz: f64,
    pub lambda_star: Option<f64>,
    pub lambda_pohozaev: Option<f64>,
    pub theta: f64,
    pub theta_star: f64,
    pub nu: f64,
    /// Surface area of the unit sphere in ℝ^N.
    pub omega_n: f64,
    /// Rayleigh quotient of the explicit profile; only on the explicit family.
    pub c_lower: Option<f64>,
    pub ill_conditioned: bool,
}

impl NamedConstants {
    pub fn compute(params: &Params) -> Self {
        let c_lower = params
            .on_explicit_family(1e-12)
            .then(|| c_estimate(params.n, params.alpha));
        NamedConstants {
            riesz_a: riesz_constant(params),
            hls_c: hls_constant(params),
            hls_over_riesz: hls_over_riesz(params.n, params.alpha),
            lambda_star: params.lambda_star().ok(),
            lambda_pohozaev: params.lambda_pohozaev().ok(),
            theta: params.theta(),
            theta_star: theta_star(params),
            nu: params.nu(),
            omega_n: sphere_area(params.n),
            c_lower,
            ill_conditioned: params.dim() - params.alpha < ILL_CONDITIONED_GAP,
        }
    }
}

/// Cached [`NamedConstants`] for `params`.
pub fn constants(params: &Params) -> Arc<NamedConstants> {
    static CACHE: OnceLock<Mutex<HashMap<[u64; 4], Arc<NamedConstants>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(params.key())
        .or_insert_with(|| Arc::new(NamedConstants::compute(params)))
        .clone()
}

/// ω_N = 2π^{N/2}/Γ(N/2).
pub fn sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * PI.powf(0.5 * nf) / gamma(0.5 * nf)
}

/// A_α = Γ((N−α)/2)/(π^{N/2} 2^α Γ(α/2)).
pub fn riesz_constant(params: &Params) -> f64 {
    riesz_a(params.n, params.alpha)
}

pub(crate) fn riesz_a(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    gamma(0.5 * (nf - alpha)) / (PI.powf(0.5 * nf) * 2f64.powf(alpha) * gamma(0.5 * alpha))
}

/// 𝒞_{N,α} = Γ((N−α)/2)/(2^α π^{α/2} Γ((N+α)/2)) · (Γ(N)/Γ(N/2))^{α/N}.
pub fn hls_constant(params: &Params) -> f64 {
    let nf = params.dim();
    let a = params.alpha;
    gamma(0.5 * (nf - a)) / (2f64.powf(a) * PI.powf(0.5 * a) * gamma(0.5 * (nf + a)))
        * ((ln_gamma(nf) - ln_gamma(0.5 * nf)) * a / nf).exp()
}

/// 𝒞_{N,α}/A_α = π^{(N−α)/2} Γ(α/2)/Γ((N+α)/2) · (Γ(N)/Γ(N/2))^{α/N}.
pub fn hls_over_riesz(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    (0.5 * (nf - alpha) * PI.ln() + ln_gamma(0.5 * alpha) - ln_gamma(0.5 * (nf + alpha))
        + (ln_gamma(nf) - ln_gamma(0.5 * nf)) * alpha / nf)
        .exp()
}

/// λ* = ((p−2)/(q−p))^{1/(q−2)}.
pub fn lambda_star(params: &Params) -> Result<f64> {
    params.lambda_star()
}

/// θ* = ((1−θ)/θ)^{qθ/(2(1−θ)+qθ)} · (N+α)/(2Np(1−θ)).
pub fn theta_star(params: &Params) -> f64 {
    let t = params.theta();
    let q = params.q;
    let nf = params.dim();
    ((1.0 - t) / t).powf(q * t / (2.0 * (1.0 - t) + q * t)) * (nf + params.alpha)
        / (2.0 * nf * params.p * (1.0 - t))
}

/// Closed-form Rayleigh quotient of v = (1+|x|²)^{−(N+1)/2} on the explicit
/// family, a lower bound for the sharp constant.
pub fn c_estimate(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    let a = alpha;
    nf * (nf + a + 2.0) / (PI.powf(0.5 * a) * 2f64.powf(a + 1.0) * (nf + 2.0))
        * (ln_gamma(0.5 * (nf - a)) - ln_gamma(0.5 * (nf + a) + 1.0)).exp()
        * ((nf + 2.0) / (2.0 * (nf + 1.0))
            * (ln_gamma(nf + 1.0) - ln_gamma(0.5 * nf + 1.0)).exp())
        .powf(a / nf)
}

/// Limit of θ* as α → 0 at fixed (p, q), q > 2p.
pub fn theta_star_alpha_zero(p: f64, q: f64) -> f64 {
    (q * (p - 1.0) / (q - 2.0 * p)).powf((q - 2.0 * p) / (2.0 * (p - 1.0) + q - 2.0 * p))
        * ((q - 2.0 * p) / (2.0 * q * (p - 1.0)) + 1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_examples() {
        let p = Params::new(3, 2.0, 2.0, 4.0).unwrap();
        assert!((riesz_constant(&p) - 1.0 / (4.0 * PI)).abs() < 1e-16);
        let p = Params::new(1, 0.5, 1.75, 3.0).unwrap();
        assert!((riesz_constant(&p) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn c_estimate_value() {
        let c = c_estimate(3, 1.0);
        assert!((c - 0.358_7).abs() < 5e-4, "{c}");
        let p = Params::new(3, 1.0, 1.5, 2.5).unwrap();
        assert!(c <= hls_constant(&p));
        assert_eq!(constants(&p).c_lower, Some(c));
    }

    #[test]
    fn lambda_star_zero_at_two() {
        let p = Params::new(3, 2.0, 2.0, 4.0).unwrap();
        assert_eq!(constants(&p).lambda_star, Some(0.0));
    }
}
