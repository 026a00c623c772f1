// SPDX-License-Identifier: Apache-2.0

use super::kernel::{KernelMethod, RadialKernel};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::quadrature::{gauss, tanh_sinh};
use crate::radial::{RadialFunction, RadialGrid, TailModel};
use std::sync::Arc;

/// Bisection depth cap for panels close to the target.
pub const MAX_DEPTH: u32 = 40;

/// Visits quadrature nodes (s, weight·g(r, s)) for ∫_a^b g(r, s) f(s) ds and
/// returns an error estimate for the singular part.
struct PanelRule<'k> {
    kernel: &'k RadialKernel,
}

impl PanelRule<'_> {
    fn visit(&self, r: f64, a: f64, b: f64, f: &mut impl FnMut(f64, f64)) -> f64 {
        if r == a {
            self.endpoint(r, a, b, true, f)
        } else if r == b {
            self.endpoint(r, a, b, false, f)
        } else if a < r && r < b {
            self.endpoint(r, a, r, false, f) + self.endpoint(r, r, b, true, f)
        } else {
            self.regular(r, a, b, 0, f);
            0.0
        }
    }

    /// Tanh-sinh on [a, b] with the target at `a` (`at_a`) or at `b`; offsets
    /// from the endpoint feed |r − s| to the kernel without cancellation.
    fn endpoint(&self, r: f64, a: f64, b: f64, at_a: bool, f: &mut impl FnMut(f64, f64)) -> f64 {
        let width = b - a;
        let mut fine = 0.0;
        let mut coarse = 0.0;
        for (k, node) in tanh_sinh().iter().enumerate() {
            let (s, d) = if at_a {
                (a + width * node.from_a, width * node.from_a)
            } else {
                (b - width * node.from_b, width * node.from_b)
            };
            let val = node.weight * width * self.kernel.eval(r, s, d);
            fine += val;
            if k % 2 == 0 {
                coarse += 2.0 * val;
            }
            f(s, val);
        }
        (fine - coarse).abs()
    }

    fn regular(&self, r: f64, a: f64, b: f64, depth: u32, f: &mut impl FnMut(f64, f64)) {
        let width = b - a;
        let dist = (r - a).abs().min((r - b).abs());
        if dist < width && depth < MAX_DEPTH {
            let mid = 0.5 * (a + b);
            self.regular(r, a, mid, depth + 1, f);
            self.regular(r, mid, b, depth + 1, f);
            return;
        }
        let ratio = dist / width;
        let n = if ratio < 4.0 {
            12
        } else if ratio < 16.0 {
            8
        } else {
            6
        };
        let rule = gauss(n);
        let half = 0.5 * width;
        let mid = 0.5 * (a + b);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let s = mid + half * x;
            f(s, w * half * self.kernel.eval(r, s, (r - s).abs()));
        }
    }

    /// ∫_L^∞ s^{−γ} g(r, s) ds.
    fn tail(&self, r: f64, length: f64, gamma: f64) -> f64 {
        let mut sum = 0.0;
        let mut add = |s: f64, w: f64| sum += w * s.powf(-gamma);
        let far = 2.0 * length.max(r);
        if r > length {
            self.visit(r, length, r, &mut add);
            self.visit(r, r, far, &mut add);
        } else {
            self.visit(r, length, far, &mut add);
        }
        // s = far / t maps [far, ∞) onto (0, 1]; with g = s^{α−1} G the
        // integrand is far^{α−γ} t^{γ−α−1} G(r, far/t).
        let alpha = self.kernel.alpha();
        let front = far.powf(alpha - gamma);
        for node in tanh_sinh() {
            let t = node.from_a;
            sum += node.weight * front * t.powf(gamma - alpha - 1.0) * self.kernel.eval_far(r, far / t);
        }
        sum
    }
}

/// One row of the discrete Riesz operator.
#[derive(Clone, Debug)]
pub struct OperatorRow {
    pub weights: Vec<f64>,
    pub tail: f64,
    pub error_estimate: f64,
}

/// Product-integration matrix of ρ ↦ I_α ∗ ρ on a grid:
/// V_i = Σ_k W_ik ρ_k + c τ_i, where ρ is the degree-5 interpolant of nodal
/// values and c r^{−γ} its tail beyond L.
#[derive(Clone, Debug)]
pub struct RieszOperator {
    grid: Arc<RadialGrid>,
    kernel: RadialKernel,
    tail_exponent: Option<f64>,
    weights: Vec<f64>,
    tail: Vec<f64>,
    error_estimate: f64,
}

impl RieszOperator {
    /// Builds the operator for densities on `grid`. `tail_exponent` is the
    /// decay rate γ of the density beyond the grid, if any.
    pub fn new(
        grid: Arc<RadialGrid>,
        dim: usize,
        alpha: f64,
        tail_exponent: Option<f64>,
        exec: Execution,
    ) -> Result<Self> {
        Self::with_method(grid, dim, alpha, tail_exponent, KernelMethod::for_dim(dim), exec)
    }

    pub fn with_method(
        grid: Arc<RadialGrid>,
        dim: usize,
        alpha: f64,
        tail_exponent: Option<f64>,
        method: KernelMethod,
        exec: Execution,
    ) -> Result<Self> {
        let kernel = RadialKernel::new(dim, alpha, method)?;
        if let Some(gamma) = tail_exponent {
            if !(gamma > alpha) {
                return Err(Error::Divergence(format!(
                    "density tail r^-{gamma} has a divergent Riesz potential (α = {alpha})"
                )));
            }
        }
        let n = grid.len();
        let rows = map_range(n, exec, |i| row_for(&kernel, &grid, tail_exponent, grid.nodes()[i]));
        let mut weights = Vec::with_capacity(n * n);
        let mut tail = Vec::with_capacity(n);
        let mut error_estimate: f64 = 0.0;
        for (i, row) in rows.into_iter().enumerate() {
            let scale: f64 = row.weights.iter().map(|w| w.abs()).sum::<f64>() + row.tail.abs();
            if !scale.is_finite() {
                return Err(Error::KernelSingular(format!(
                    "non-finite Riesz weights at r = {}",
                    grid.nodes()[i]
                )));
            }
            error_estimate = error_estimate.max(row.error_estimate / scale);
            weights.extend_from_slice(&row.weights);
            tail.push(row.tail);
        }
        Ok(RieszOperator {
            grid,
            kernel,
            tail_exponent,
            weights,
            tail,
            error_estimate,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn kernel(&self) -> &RadialKernel {
        &self.kernel
    }

    pub fn method(&self) -> KernelMethod {
        self.kernel.method()
    }

    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    /// Relative error estimate of the singular panel rules (tanh-sinh at
    /// step h against step 2h), maximized over rows.
    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    /// Row i of W.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.len();
        &self.weights[i * n..(i + 1) * n]
    }

    /// Tail column τ_i = ∫_L^∞ s^{−γ} g(r_i, s) ds (zero without a tail).
    pub fn tail_column(&self) -> &[f64] {
        &self.tail
    }

    /// V = W ρ + c τ for nodal density values and tail model.
    pub fn apply(&self, rho: &[f64], tail: &TailModel) -> Result<Vec<f64>> {
        let c = self.tail_coefficient(tail)?;
        let n = self.grid.len();
        if rho.len() != n {
            return Err(Error::Config(format!("{} density values for {n} nodes", rho.len())));
        }
        Ok((0..n)
            .map(|i| dot(self.row(i), rho) + c * self.tail[i])
            .collect())
    }

    /// Potential of `rho`, which must live on the operator's grid.
    pub fn apply_fn(&self, rho: &RadialFunction) -> Result<Vec<f64>> {
        if !Arc::ptr_eq(rho.grid(), &self.grid) && **rho.grid() != *self.grid {
            return Err(Error::Config("density and operator grids differ".into()));
        }
        self.apply(rho.values(), &rho.tail())
    }

    /// V at an arbitrary radius (off-grid targets split their panel; targets
    /// beyond L integrate the grid part and the tail separately).
    pub fn potential_at(&self, r: f64, rho: &RadialFunction) -> Result<f64> {
        let c = self.tail_coefficient(&rho.tail())?;
        let row = row_for(&self.kernel, &self.grid, self.tail_exponent, r.abs());
        Ok(dot(&row.weights, rho.values()) + c * row.tail)
    }

    fn tail_coefficient(&self, tail: &TailModel) -> Result<f64> {
        if !tail.is_algebraic() || tail.coefficient == 0.0 {
            return Ok(0.0);
        }
        match self.tail_exponent {
            Some(g) if (g - tail.exponent).abs() <= 1e-12 * g => Ok(tail.coefficient),
            _ => Err(Error::Config(format!(
                "density tail exponent {} does not match the operator ({:?})",
                tail.exponent, self.tail_exponent
            ))),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn row_for(kernel: &RadialKernel, grid: &RadialGrid, tail_exponent: Option<f64>, r: f64) -> OperatorRow {
    let rule = PanelRule { kernel };
    let nodes = grid.nodes();
    let mut weights = vec![0.0; nodes.len()];
    let mut error_estimate = 0.0;
    for j in 0..grid.intervals() {
        let start = grid.stencil_start(j);
        error_estimate += rule.visit(r, nodes[j], nodes[j + 1], &mut |s, w| {
            for (k, l) in grid.basis(j, s).iter().enumerate() {
                weights[start + k] += w * l;
            }
        });
    }
    let tail = tail_exponent.map_or(0.0, |g| rule.tail(r, grid.length(), g));
    OperatorRow {
        weights,
        tail,
        error_estimate,
    }
}

/// ∫_a^b g(r, s) f(s) ds with the same panel rules as the operator, after
/// splitting [a, b] into `pieces` equal panels.
pub fn integrate_against(kernel: &RadialKernel, r: f64, a: f64, b: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = PanelRule { kernel };
    let mut sum = 0.0;
    let pieces = pieces.max(1);
    for k in 0..pieces {
        let lo = a + (b - a) * k as f64 / pieces as f64;
        let hi = if k + 1 == pieces { b } else { a + (b - a) * (k + 1) as f64 / pieces as f64 };
        rule.visit(r, lo, hi, &mut |s, w| sum += w * f(s));
    }
    sum
}
