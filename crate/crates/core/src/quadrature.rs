// SPDX-License-Identifier: Apache-2.0

//! Fixed quadrature rules: Gauss-Legendre and a tanh-sinh rule that reports
//! each node's distance to both endpoints without cancellation.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }
}

/// P_n(x) and P_n'(x).
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const MAX_CACHED: usize = 32;

/// Cached Gauss-Legendre rule with `n` points, 1 ≤ n ≤ 32.
pub fn gauss(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (1..=MAX_CACHED).map(GaussRule::new).collect());
    &rules[n.clamp(1, MAX_CACHED) - 1]
}

/// One tanh-sinh node on [0, 1]: `from_a` = x, `from_b` = 1 − x, both to
/// full relative precision.
#[derive(Clone, Copy, Debug)]
pub struct TanhSinhNode {
    pub from_a: f64,
    pub from_b: f64,
    pub weight: f64,
}

const TS_STEP: f64 = 0.125;
const TS_LEVELS: i32 = 48;

/// Tanh-sinh rule on [0, 1] (step 1/8, |t| ≤ 6). Endpoint offsets reach
/// ~1e-275, enough for integrands as singular as x^{-0.95}.
pub fn tanh_sinh() -> &'static [TanhSinhNode] {
    static RULE: OnceLock<Vec<TanhSinhNode>> = OnceLock::new();
    RULE.get_or_init(|| {
        (-TS_LEVELS..=TS_LEVELS)
            .map(|k| {
                let t = k as f64 * TS_STEP;
                let u = 0.5 * PI * t.sinh();
                let cu = u.cosh();
                TanhSinhNode {
                    from_a: 1.0 / (1.0 + (-2.0 * u).exp()),
                    from_b: 1.0 / (1.0 + (2.0 * u).exp()),
                    weight: TS_STEP * 0.25 * PI * t.cosh() / (cu * cu),
                }
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exactness() {
        for n in [1, 2, 5, 8, 12, 20] {
            let rule = gauss(n);
            for k in 0..2 * n {
                let got: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!((got - want).abs() < 1e-14, "n={n} k={k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn tanh_sinh_singular_endpoint() {
        for alpha in [0.05, 0.2, 0.5, 1.0, 1.7] {
            let got: f64 = tanh_sinh()
                .iter()
                .map(|nd| nd.weight * nd.from_a.powf(alpha - 1.0))
                .sum();
            assert!((got * alpha - 1.0).abs() < 2e-14, "alpha={alpha}: {}", got * alpha);
            let got: f64 = tanh_sinh()
                .iter()
                .map(|nd| nd.weight * nd.from_b.powf(alpha - 1.0) * nd.from_a)
                .sum();
            let want = 1.0 / (alpha * (alpha + 1.0));
            assert!((got / want - 1.0).abs() < 2e-14);
        }
    }
}
