// SPDX-License-Identifier: Apache-2.0

use super::kernel::{KernelMethod, RadialKernel};
use super::operator::integrate_against;
use crate::error::{Error, Result};
use crate::quadrature::gauss;
use crate::radial::RadialFunction;
use crate::special_fn::{explicit_family_exponents, gamma, hyp2f1, Params};

/// Tolerance on p for membership in the explicit family.
pub const FAMILY_TOL: f64 = 1e-12;

/// (I_α ∗ χ_{B_R})(x). Inside the ball this is the hypergeometric closed
/// form; outside, a kernel quadrature over [0, R].
pub fn closed_form_ball(radius: f64, x: f64, params: &Params) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
    }
    let n = params.dim();
    let alpha = params.alpha;
    let x = x.abs();
    if x <= radius {
        let front = gamma(0.5 * (n - alpha)) * radius.powf(alpha)
            / (2f64.powf(alpha) * gamma(1.0 + 0.5 * alpha) * gamma(0.5 * n));
        let z = (x / radius).powi(2);
        Ok(front * hyp2f1(-0.5 * alpha, 0.5 * (n - alpha), 0.5 * n, z)?)
    } else {
        let kernel = RadialKernel::new(params.n, alpha, KernelMethod::for_dim(params.n))?;
        Ok(integrate_against(&kernel, x, 0.0, radius, 16, |_| 1.0))
    }
}

/// I_α ∗ v^p for v = (1+|x|²)^{−(N+1)/2} and p = (N+α+2)/(N+1):
/// 2^{−1−α}Γ((N−α)/2)/Γ((N+α+2)/2) · (1+x²)^{−1−N/2+α/2} (N + α x²).
pub fn closed_form_explicit_family(x: f64, params: &Params) -> Result<f64> {
    let (p_family, _) = explicit_family_exponents(params.n, params.alpha);
    if (params.p - p_family).abs() > FAMILY_TOL {
        return Err(Error::Domain(format!(
            "not on the explicit family: p = {} but the family needs p = {p_family}",
            params.p
        )));
    }
    let n = params.dim();
    let a = params.alpha;
    let k0 = 2f64.powf(-1.0 - a) * gamma(0.5 * (n - a)) / gamma(0.5 * (n + a + 2.0));
    Ok(k0 * (1.0 + x * x).powf(-1.0 - 0.5 * n + 0.5 * a) * (n + a * x * x))
}

/// Newtonian potential (N = 3, α = 2) by cumulative sums:
/// V(r) = r^{−1} ∫_0^r s² ρ ds + ∫_r^∞ s ρ ds, in O(M).
pub fn newtonian_potential(rho: &RadialFunction) -> Result<Vec<f64>> {
    if rho.dim() != 3 {
        return Err(Error::Config(format!("Newtonian fast path needs N = 3, got {}", rho.dim())));
    }
    let grid = rho.grid();
    let nodes = grid.nodes();
    let m = grid.intervals();
    let rule = gauss(5);
    let mut inner = vec![0.0; m];
    let mut outer = vec![0.0; m];
    for j in 0..m {
        let (a, b) = (nodes[j], nodes[j + 1]);
        let half = 0.5 * (b - a);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let s = 0.5 * (a + b) + half * x;
            let v = grid.interpolate(rho.values(), s);
            inner[j] += w * half * s * s * v;
            outer[j] += w * half * s * v;
        }
    }
    let tail = rho.tail();
    let mut out_sum = if tail.is_algebraic() && tail.coefficient > 0.0 {
        if !(tail.exponent > 2.0) {
            return Err(Error::Divergence(format!(
                "density tail r^-{} has a divergent Newtonian potential",
                tail.exponent
            )));
        }
        let l = grid.length();
        tail.coefficient * l.powf(2.0 - tail.exponent) / (tail.exponent - 2.0)
    } else {
        0.0
    };
    let mut values = vec![0.0; m + 1];
    for i in (0..=m).rev() {
        if i < m {
            out_sum += outer[i];
        }
        values[i] = out_sum;
    }
    let mut in_sum = 0.0;
    for i in 1..=m {
        in_sum += inner[i - 1];
        values[i] += in_sum / nodes[i];
    }
    Ok(values)
}
