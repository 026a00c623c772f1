// SPDX-License-Identifier: Apache-2.0

//! Riesz potentials I_α ∗ ρ of radial densities.
//!
//! The radial kernel g(r, s) collects the angular integral: a closed form in
//! one and three dimensions, a Gauss hypergeometric function otherwise. The
//! discrete operator integrates g against the degree-5 interpolant of the
//! nodal density, panel by panel. Panels with the target as an endpoint use
//! tanh-sinh (the kernel is singular on r = s when α ≤ 1), panels close to
//! the target are bisected, and an algebraic density tail beyond the grid is
//! integrated in closed-form coordinates s = 2L/t.

mod closed;
mod kernel;
mod operator;

pub use closed::{closed_form_ball, closed_form_explicit_family, newtonian_potential, FAMILY_TOL};
pub use kernel::{kernel_3d, KernelMethod, RadialKernel};
pub use operator::{integrate_against, OperatorRow, RieszOperator, MAX_DEPTH};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::exec::map_range;
use crate::radial::{lp_norm_pow, RadialFunction, RadialGrid, TailModel, STENCIL};
use crate::special_fn::{riesz_constant, Params};
use serde::Serialize;
use std::sync::Arc;

/// Potential values at the nodes of the density's grid.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialField {
    #[serde(skip)]
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
    pub method: KernelMethod,
    /// Estimated relative quadrature error on singular panels.
    pub error_estimate: f64,
}

fn check_dims(rho: &RadialFunction, params: &Params) -> Result<()> {
    if rho.dim() != params.n {
        return Err(Error::Config(format!(
            "density lives in N = {} but parameters have N = {}",
            rho.dim(),
            params.n
        )));
    }
    Ok(())
}

/// Builds the operator matching the density's grid and tail.
pub fn operator_for(rho: &RadialFunction, params: &Params, method: KernelMethod, exec: Execution) -> Result<RieszOperator> {
    check_dims(rho, params)?;
    let tail = rho.tail();
    let gamma = (tail.is_algebraic() && tail.coefficient > 0.0).then_some(tail.exponent);
    RieszOperator::with_method(rho.grid().clone(), params.n, params.alpha, gamma, method, exec)
}

/// I_α ∗ ρ at the grid nodes, with the closed kernel when N ∈ {1, 3}.
pub fn potential(rho: &RadialFunction, params: &Params) -> Result<PotentialField> {
    potential_with(rho, params, KernelMethod::for_dim(params.n), Execution::default())
}

/// As [`potential`] with an explicit kernel and execution mode. Trailing
/// zeros of a density without far-field tail are cut off first, so the
/// interpolant never straddles an edge jump of compactly supported data;
/// the potential at the cut nodes is evaluated off-grid.
pub fn potential_with(
    rho: &RadialFunction,
    params: &Params,
    method: KernelMethod,
    exec: Execution,
) -> Result<PotentialField> {
    if let Some(support) = trim_zero_tail(rho)? {
        let op = operator_for(&support, params, method, exec)?;
        let mut values = op.apply_fn(&support)?;
        let nodes = rho.grid().nodes();
        let rest = map_range(nodes.len() - values.len(), exec, |k| op.potential_at(nodes[values.len() + k], &support));
        for v in rest {
            values.push(v?);
        }
        return Ok(PotentialField {
            grid: rho.grid().clone(),
            values,
            method,
            error_estimate: op.error_estimate(),
        });
    }
    let op = operator_for(rho, params, method, exec)?;
    Ok(PotentialField {
        grid: rho.grid().clone(),
        values: op.apply_fn(rho)?,
        method,
        error_estimate: op.error_estimate(),
    })
}

/// The density restricted to [0, r_k], r_k its last nonzero node, when it
/// has no tail and at least one zero node past r_k.
fn trim_zero_tail(rho: &RadialFunction) -> Result<Option<RadialFunction>> {
    let v = rho.values();
    if rho.tail().is_algebraic() && rho.tail().coefficient != 0.0 {
        return Ok(None);
    }
    let Some(k) = v.iter().rposition(|&x| x != 0.0) else {
        return Ok(None);
    };
    if k + 1 == v.len() || k < 2 * STENCIL {
        return Ok(None);
    }
    let grid = RadialGrid::from_nodes(rho.grid().nodes()[..=k].to_vec(), rho.grid().order())?;
    Ok(Some(RadialFunction::new(Arc::new(grid), rho.dim(), v[..=k].to_vec(), TailModel::NONE)?))
}

/// (I_α ∗ ρ)(r) / (A_α r^{α−N} ∫ρ) on the outer 20 % of nodes.
pub fn farfield_check(rho: &RadialFunction, field: &PotentialField, params: &Params) -> Result<Vec<(f64, f64)>> {
    check_dims(rho, params)?;
    let mass = lp_norm_pow(rho, 1.0)?;
    let a = riesz_constant(params);
    let nodes = field.grid.nodes();
    let first = nodes.len() - (nodes.len() / 5).max(1);
    Ok(nodes[first..]
        .iter()
        .zip(&field.values[first..])
        .map(|(&r, &v)| (r, v / (a * r.powf(params.alpha - params.dim()) * mass)))
        .collect())
}

/// The far-field ratio at a single radius, possibly beyond the grid.
pub fn farfield_ratio(op: &RieszOperator, rho: &RadialFunction, params: &Params, r: f64) -> Result<f64> {
    let mass = lp_norm_pow(rho, 1.0)?;
    let v = op.potential_at(r, rho)?;
    Ok(v / (riesz_constant(params) * r.powf(params.alpha - params.dim()) * mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{make_grid, Clustering, TailModel};

    fn params(n: usize, alpha: f64) -> Params {
        // Exponents only matter for admissibility here.
        let p = (n as f64 + alpha) / n as f64 + 0.3;
        Params::new(n, alpha, p, 2.0 * n as f64 * p / (n as f64 + alpha) + 1.0).unwrap()
    }

    fn ball(n: usize, radius: f64, m: usize) -> RadialFunction {
        let g = Arc::new(make_grid(radius, m, Clustering::Uniform).unwrap());
        RadialFunction::from_fn(g, n, |_| 1.0, TailModel::NONE).unwrap()
    }

    #[test]
    fn ball_oracle() {
        for (n, alpha) in [(3, 2.0), (3, 0.5), (2, 1.5), (1, 0.4)] {
            let pr = params(n, alpha);
            let rho = ball(n, 1.5, 64);
            let op = operator_for(&rho, &pr, KernelMethod::for_dim(n), Execution::Sequential).unwrap();
            for k in 0..50 {
                let x = 1.5 * (k as f64 + 0.5) / 50.0;
                let want = closed_form_ball(1.5, x, &pr).unwrap();
                let got = op.potential_at(x, &rho).unwrap();
                assert!((got / want - 1.0).abs() < 1e-10, "N={n} α={alpha} x={x}: {got} vs {want}");
            }
            let field = op.apply_fn(&rho).unwrap();
            for (r, v) in rho.grid().nodes().iter().zip(&field) {
                let want = closed_form_ball(1.5, *r, &pr).unwrap();
                assert!((v / want - 1.0).abs() < 1e-10, "node r={r}");
            }
        }
    }

    #[test]
    fn ball_center_value() {
        let pr = params(3, 1.2);
        let a = riesz_constant(&pr);
        let want = a * 4.0 * std::f64::consts::PI * 2f64.powf(1.2) / 1.2;
        assert!((closed_form_ball(2.0, 0.0, &pr).unwrap() / want - 1.0).abs() < 1e-14);
        // Newtonian ball: A_2 (2π)(R² − x²/3) inside.
        let pr = params(3, 2.0);
        let a = riesz_constant(&pr);
        let want = a * 2.0 * std::f64::consts::PI * (4.0 - 1.0 / 3.0);
        assert!((closed_form_ball(2.0, 1.0, &pr).unwrap() / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn explicit_family_potential() {
        let pr = Params::new(3, 1.0, 1.5, 2.5).unwrap();
        assert!((closed_form_explicit_family(0.0, &pr).unwrap() - 0.375).abs() < 1e-15);
        let g = Arc::new(make_grid(30.0, 768, Clustering::Uniform).unwrap());
        let v = RadialFunction::from_fn(g, 3, |r| (1.0 + r * r).powi(-2), TailModel::matched(4.0, 30.0, 901f64.powi(-2)))
            .unwrap();
        let rho = v.powf(1.5);
        let field = potential(&rho, &pr).unwrap();
        for (r, val) in rho.grid().nodes().iter().zip(&field.values) {
            let want = closed_form_explicit_family(*r, &pr).unwrap();
            assert!((val / want - 1.0).abs() < 1e-7, "r={r}: {val} vs {want}");
        }
        let ratios = farfield_check(&rho, &field, &pr).unwrap();
        assert!(ratios.iter().all(|(_, q)| (0.95..=1.05).contains(q)));
        let off = Params::new(3, 1.0, 1.6, 2.5).unwrap();
        assert!(matches!(closed_form_explicit_family(0.0, &off), Err(Error::Domain(_))));
    }

    #[test]
    fn exterior_newtonian() {
        let pr = params(3, 2.0);
        let rho = ball(3, 1.0, 64);
        let op = operator_for(&rho, &pr, KernelMethod::Closed3d, Execution::Sequential).unwrap();
        let ratio = farfield_ratio(&op, &rho, &pr, 100.0).unwrap();
        assert!((ratio - 1.0).abs() < 1e-3);
        // Newton: the exterior field of a ball is exactly the point-mass field.
        let ext = closed_form_ball(1.0, 3.0, &pr).unwrap();
        let want = riesz_constant(&pr) * (4.0 * std::f64::consts::PI / 3.0) / 3.0;
        assert!((ext / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_and_monotone() {
        let pr = params(3, 0.7);
        let g = Arc::new(make_grid(6.0, 96, Clustering::OriginAndBoundary).unwrap());
        let rho = RadialFunction::from_fn(g, 3, |r| (-r * r).exp(), TailModel::NONE).unwrap();
        let op = operator_for(&rho, &pr, KernelMethod::Closed3d, Execution::Sequential).unwrap();
        let v = op.apply_fn(&rho).unwrap();
        let v3 = op.apply_fn(&rho.scaled(3.0)).unwrap();
        for (a, b) in v.iter().zip(&v3) {
            assert!((3.0 * a - b).abs() <= 1e-13 * b.abs());
        }
        assert!(v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        let zero = op.apply_fn(&rho.scaled(0.0)).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn hypergeometric_and_closed_operators_agree() {
        let pr = params(3, 1.4);
        let g = Arc::new(make_grid(5.0, 64, Clustering::Uniform).unwrap());
        let rho = RadialFunction::from_fn(g, 3, |r| (1.0 + r * r).powi(-3), TailModel::NONE).unwrap();
        let a = potential_with(&rho, &pr, KernelMethod::Closed3d, Execution::Sequential).unwrap();
        let b = potential_with(&rho, &pr, KernelMethod::HypergeomN, Execution::Sequential).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x / y - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn newtonian_fast_path() {
        let pr = params(3, 2.0);
        let g = Arc::new(make_grid(8.0, 128, Clustering::OriginAndBoundary).unwrap());
        let rho = RadialFunction::from_fn(g, 3, |r| (1.0 + r * r).powf(-2.5), TailModel::matched(5.0, 8.0, 65f64.powf(-2.5)))
            .unwrap();
        let slow = potential(&rho, &pr).unwrap();
        let fast = newtonian_potential(&rho).unwrap();
        for (x, y) in slow.values.iter().zip(&fast) {
            assert!((x / y - 1.0).abs() < 1e-11, "{x} vs {y}");
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let pr = params(3, 0.5);
        let rho = ball(3, 1.0, 48);
        let s = potential_with(&rho, &pr, KernelMethod::Closed3d, Execution::Sequential).unwrap();
        let p = potential_with(&rho, &pr, KernelMethod::Closed3d, Execution::Parallel).unwrap();
        assert_eq!(s.values, p.values);
    }
}
