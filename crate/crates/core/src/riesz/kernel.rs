// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::special_fn::{riesz_a, sphere_area, Hyp2f1};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMethod {
    #[serde(rename = "hypergeom-N")]
    HypergeomN,
    #[serde(rename = "closed-3d")]
    Closed3d,
    #[serde(rename = "closed-1d")]
    Closed1d,
}

impl KernelMethod {
    /// Closed kernels where available, the hypergeometric one otherwise.
    pub fn for_dim(dim: usize) -> Self {
        match dim {
            1 => KernelMethod::Closed1d,
            3 => KernelMethod::Closed3d,
            _ => KernelMethod::HypergeomN,
        }
    }
}

/// sinh(z)/z.
fn sinhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

/// [(1+y)^β − δ^β]/β with δ = 1 − y given separately, continuous at β = 0.
fn power_gap(y: f64, delta: f64, beta: f64) -> f64 {
    if delta == 0.0 {
        return if beta > 0.0 { (1.0 + y).powf(beta) / beta } else { f64::INFINITY };
    }
    let l1 = y.ln_1p();
    let l2 = if y < 0.5 { (-y).ln_1p() } else { delta.ln() };
    let h = 0.5 * (l1 - l2);
    2.0 * (0.5 * beta * (l1 + l2)).exp() * h * sinhc(beta * h)
}

/// Angular factor of the three-dimensional Riesz kernel,
/// [(r+s)^{α−1} − |r−s|^{α−1}]/(r s (α−1)), with the logarithmic form at α = 1.
pub fn kernel_3d(r: f64, s: f64, alpha: f64) -> Result<f64> {
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::Domain(format!("kernel_3d needs r, s > 0, got {r}, {s}")));
    }
    let beta = alpha - 1.0;
    if r == s && beta <= 0.0 {
        return Err(Error::KernelSingular(format!(
            "kernel_3d is singular on r = s for α = {alpha}"
        )));
    }
    let big = r.max(s);
    let y = r.min(s) / big;
    let delta = (r - s).abs() / big;
    Ok(big.powf(beta) * power_gap(y, delta, beta) / (r * s))
}

/// Radial kernel g(r, s) = s^{N−1} ∫_{S^{N−1}} A_α |r e − s ω|^{α−N} dω, so
/// that (I_α ∗ ρ)(r) = ∫_0^∞ g(r, s) ρ(s) ds.
#[derive(Clone, Copy, Debug)]
pub struct RadialKernel {
    dim: usize,
    alpha: f64,
    method: KernelMethod,
    scale: f64,
    hyp: Option<Hyp2f1>,
}

impl RadialKernel {
    pub fn new(dim: usize, alpha: f64, method: KernelMethod) -> Result<Self> {
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::Domain(format!("Riesz order α = {alpha} outside (0, {dim})")));
        }
        let a = riesz_a(dim, alpha);
        let (scale, hyp) = match (method, dim) {
            (KernelMethod::Closed3d, 3) => (2.0 * PI * a, None),
            (KernelMethod::Closed1d, 1) => (a, None),
            (KernelMethod::HypergeomN, _) => {
                let h = 0.25 * (dim as f64 - alpha);
                (a * sphere_area(dim), Some(Hyp2f1::new(h, h + 0.5, 0.5 * dim as f64)?))
            }
            (m, n) => return Err(Error::Config(format!("kernel {m:?} is not available for N = {n}"))),
        };
        Ok(RadialKernel {
            dim,
            alpha,
            method,
            scale,
            hyp,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn method(&self) -> KernelMethod {
        self.method
    }

    /// g(r, s) with d = |r − s| supplied to full relative precision.
    pub fn eval(&self, r: f64, s: f64, d: f64) -> f64 {
        let big = r.max(s);
        if big == 0.0 {
            return 0.0;
        }
        big.powf(self.alpha - 1.0) * self.shape(r, s, d / big)
    }

    /// g(r, s)/s^{α−1} for s ≥ r, finite as s → ∞.
    pub fn eval_far(&self, r: f64, s: f64) -> f64 {
        self.shape(r, s, 1.0 - r / s)
    }

    /// g(r, s)/max(r, s)^{α−1}; `delta` = |r − s|/max(r, s).
    fn shape(&self, r: f64, s: f64, delta: f64) -> f64 {
        let beta = self.alpha - 1.0;
        let big = r.max(s);
        let y = r.min(s) / big;
        // ln(1 − y) straight from y where that loses nothing.
        let l2 = if y < 0.5 { (-y).ln_1p() } else { delta.ln() };
        match self.method {
            KernelMethod::Closed1d => self.scale * (l2 * beta).exp() + self.scale * (1.0 + y).powf(beta),
            KernelMethod::Closed3d => {
                if r == 0.0 {
                    return 2.0 * self.scale;
                }
                if s == 0.0 {
                    return 0.0;
                }
                self.scale * (s / r) * power_gap(y, delta, beta)
            }
            KernelMethod::HypergeomN => {
                let n = self.dim as f64;
                let y2 = 1.0 + y * y;
                let z = (4.0 * y * y / (y2 * y2)).min(1.0);
                let w = (l2.exp() * (1.0 + y) / y2).powi(2);
                let f = self
                    .hyp
                    .as_ref()
                    .map_or(f64::NAN, |h| h.eval(z, w).unwrap_or(f64::NAN));
                self.scale * (s / big).powf(n - 1.0) * y2.powf(0.5 * (self.alpha - n)) * f
            }
        }
    }

    /// Far-field form g(r, s) ≈ A_α ω_N s^{N−1} s^{α−N} for s ≫ r.
    pub fn far_field_scale(&self) -> f64 {
        riesz_a(self.dim, self.alpha) * sphere_area(self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_3d_values() {
        assert!((kernel_3d(1.0, 2.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((kernel_3d(1.0, 3.0, 1.0).unwrap() - 2f64.ln() / 3.0).abs() < 1e-15);
        // s → 0: limit 2 r^{α−3}.
        for alpha in [0.5, 1.5, 2.5] {
            let r = 1.3f64;
            let got = kernel_3d(r, 1e-7, alpha).unwrap();
            assert!((got / (2.0 * r.powf(alpha - 3.0)) - 1.0).abs() < 1e-12);
        }
        assert!(matches!(kernel_3d(1.0, 1.0, 0.5), Err(Error::KernelSingular(_))));
        assert!(kernel_3d(1.0, 1.0, 1.5).unwrap().is_finite());
    }

    #[test]
    fn kernel_3d_matches_direct_formula() {
        for alpha in [0.3, 1.0 + 1e-4, 1.7, 2.6] {
            for (r, s) in [(0.4f64, 2.0f64), (3.0, 1.1), (1.0, 1.5)] {
                let b = alpha - 1.0;
                let direct = ((r + s).powf(b) - (r - s).abs().powf(b)) / (r * s * b);
                let got = kernel_3d(r, s, alpha).unwrap();
                assert!((got / direct - 1.0).abs() < 1e-9, "{alpha} {r} {s}");
            }
        }
    }

    #[test]
    fn hypergeometric_kernel_agrees_with_closed_3d() {
        for alpha in [0.5, 1.0, 1.5, 2.0, 2.7] {
            let h = RadialKernel::new(3, alpha, KernelMethod::HypergeomN).unwrap();
            let c = RadialKernel::new(3, alpha, KernelMethod::Closed3d).unwrap();
            for (r, s) in [(0.0f64, 0.7f64), (0.3, 1.2), (2.0, 0.5), (1.0, 1.0 + 1e-9), (1.0, 1.3)] {
                let d = (r - s).abs();
                let (a, b) = (h.eval(r, s, d), c.eval(r, s, d));
                assert!((a / b - 1.0).abs() < 1e-9, "α={alpha} r={r} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hypergeometric_kernel_agrees_with_closed_1d() {
        let h = RadialKernel::new(1, 0.6, KernelMethod::HypergeomN).unwrap();
        let c = RadialKernel::new(1, 0.6, KernelMethod::Closed1d).unwrap();
        for (r, s) in [(0.0f64, 0.7f64), (0.3, 1.2), (2.0, 0.5)] {
            let d = (r - s).abs();
            assert!((h.eval(r, s, d) / c.eval(r, s, d) - 1.0).abs() < 1e-10);
        }
    }
}
