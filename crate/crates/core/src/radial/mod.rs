// SPDX-License-Identifier: Apache-2.0

//! Radial profiles: grids, nodal functions with far-field tails, L^s norms,
//! the discrete radial Laplacian and tail fitting.

mod function;
mod grid;
pub mod io;
mod laplacian;

pub use function::{RadialFunction, TailKind, TailModel};
pub use grid::{make_graded_grid, make_grid, Clustering, RadialGrid, DEFAULT_ORDER, MIN_INTERVALS, STENCIL};
pub use laplacian::{radial_laplacian, solve_tridiagonal, Laplacian};

use crate::error::{Error, Result};
use crate::quadrature::gauss;
use crate::special_fn::sphere_area;

/// Default share of outer nodes used by [`fit_tail`].
pub const DEFAULT_TAIL_WINDOW: f64 = 0.2;

/// Σ ω_k f_k: the integral over the ball B_L of the interpolant of nodal
/// values `f` (radial, dimension `dim`).
pub fn integrate_nodal(grid: &RadialGrid, dim: usize, f: &[f64]) -> f64 {
    let w = grid.volume_weights(dim);
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// ∫_{r>L} ω_N r^{N−1} (c r^{−β})^s dr, or a divergence error.
pub fn tail_integral(dim: usize, tail: &TailModel, length: f64, s: f64) -> Result<f64> {
    if !tail.is_algebraic() || tail.coefficient == 0.0 {
        return Ok(0.0);
    }
    let decay = s * tail.exponent - dim as f64;
    if decay <= 0.0 {
        return Err(Error::Divergence(format!(
            "tail r^-{} raised to {s} is not integrable in dimension {dim}",
            tail.exponent
        )));
    }
    Ok(sphere_area(dim) * tail.coefficient.powf(s) * length.powf(-decay) / decay)
}

/// ∫_{R^N} |u|^s dx, grid part plus the closed-form tail.
pub fn lp_norm_pow(u: &RadialFunction, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("norm exponent must be positive, got {s}")));
    }
    let tail = tail_integral(u.dim(), &u.tail(), u.grid().length(), s)?;
    let nodal: Vec<f64> = u.values().iter().map(|v| v.powf(s)).collect();
    Ok(integrate_nodal(u.grid(), u.dim(), &nodal) + tail)
}

/// ‖a − b‖₂ over the ball of the larger grid, each profile through its own
/// interpolant (and tail beyond its grid). Panels break at the nodes of both
/// grids, so the Gauss rule sees polynomials on every panel.
pub fn l2_distance(a: &RadialFunction, b: &RadialFunction) -> f64 {
    let dim = a.dim();
    let mut breaks: Vec<f64> = a.grid().nodes().iter().chain(b.grid().nodes()).copied().collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let rule = gauss(8);
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            let r = lo + half * (1.0 + x);
            let d = a.eval(r) - b.eval(r);
            sum += half * wt * r.powi(dim as i32 - 1) * d * d;
        }
    }
    (sphere_area(dim) * sum).sqrt()
}

/// Least-squares fit of ln u = ln c − β ln r over the outer `window` share
/// of nodes; returns (β, c).
pub fn fit_tail(u: &RadialFunction, window: f64) -> Result<(f64, f64)> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::Config(format!("tail window must lie in (0, 1], got {window}")));
    }
    let n = u.values().len();
    let count = ((n as f64 * window).round() as usize).clamp(2, n - 1);
    let first = n - count;
    fit_log_line(&u.grid().nodes()[first..], &u.values()[first..])
}

/// As [`fit_tail`], over the nodes with r in [r_lo, r_hi].
pub fn fit_tail_range(u: &RadialFunction, r_lo: f64, r_hi: f64) -> Result<(f64, f64)> {
    let (r, v): (Vec<f64>, Vec<f64>) = u
        .grid()
        .nodes()
        .iter()
        .zip(u.values())
        .filter(|(r, _)| **r >= r_lo && **r <= r_hi)
        .map(|(a, b)| (*a, *b))
        .unzip();
    fit_log_line(&r, &v)
}

fn fit_log_line(r: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    if r.len() < 2 {
        return Err(Error::Fit("fewer than two nodes in the tail window".into()));
    }
    if let Some((ri, vi)) = r.iter().zip(v).find(|(ri, vi)| !(**vi > 0.0) || !(**ri > 0.0)) {
        return Err(Error::Fit(format!("non-positive value {vi} at r = {ri} in the tail window")));
    }
    let x: Vec<f64> = r.iter().map(|a| a.ln()).collect();
    let y: Vec<f64> = v.iter().map(|a| a.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("tail window spans a single radius".into()));
    }
    let slope = sxy / sxx;
    Ok((-slope, (my - slope * mx).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::gamma;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(l: f64, m: usize, c: Clustering) -> Arc<RadialGrid> {
        Arc::new(make_grid(l, m, c).unwrap())
    }

    #[test]
    fn ball_volume() {
        // Nodal indicator of B_1 on a grid ending at 1.
        let g = grid(1.0, 64, Clustering::Uniform);
        let u = RadialFunction::from_fn(g, 3, |_| 1.0, TailModel::NONE).unwrap();
        assert!((lp_norm_pow(&u, 2.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn explicit_profile_norms() {
        let g = grid(400.0, 4096, Clustering::OriginAndBoundary);
        let u = RadialFunction::from_fn(g, 3, |r| (1.0 + r * r).powi(-2), TailModel::NONE).unwrap();
        let u = u.with_tail(TailModel::algebraic(4.0, 1.0)).unwrap();
        let l2 = PI.powf(1.5) * gamma(2.5) / gamma(4.0);
        let lq = PI.powf(1.5) * gamma(3.5) / gamma(5.0);
        assert!((lp_norm_pow(&u, 2.0).unwrap() / l2 - 1.0).abs() < 1e-8);
        assert!((lp_norm_pow(&u, 2.5).unwrap() / lq - 1.0).abs() < 1e-8);
    }

    #[test]
    fn monomial_exactness() {
        let g = grid(1.7, 48, Clustering::BoundaryClustered);
        for k in 0..=5 {
            let u = RadialFunction::from_fn(g.clone(), 3, |r| r.powi(k), TailModel::NONE).unwrap();
            let exact = 4.0 * PI * 1.7f64.powi(3 + k) / (3 + k) as f64;
            assert!((lp_norm_pow(&u, 1.0).unwrap() / exact - 1.0).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn divergent_tail() {
        let g = grid(10.0, 64, Clustering::Uniform);
        let u = RadialFunction::from_fn(g, 3, |r| (1.0 + r).powi(-2), TailModel::algebraic(2.0, 1.0)).unwrap();
        assert!(matches!(lp_norm_pow(&u, 1.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn laplacian_oracles() {
        let g = grid(3.0, 96, Clustering::OriginAndBoundary);
        let one = RadialFunction::from_fn(g.clone(), 3, |_| 1.0, TailModel::NONE).unwrap();
        let worst = radial_laplacian(&one).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(worst, 0.0);
        let smooth = grid(3.0, 96, Clustering::Uniform);
        let sq = RadialFunction::from_fn(smooth, 3, |r| r * r, TailModel::NONE).unwrap();
        assert!(radial_laplacian(&sq).iter().all(|v| (v - 6.0).abs() < 1e-8));
        // Clustered panels amplify rounding by 1/h², but the stencil stays exact.
        let sq = RadialFunction::from_fn(g, 3, |r| r * r, TailModel::NONE).unwrap();
        assert!(radial_laplacian(&sq).iter().all(|v| (v - 6.0).abs() < 1e-5));

        let err = |m: usize| {
            let g = grid(3.0, m, Clustering::Uniform);
            let u = RadialFunction::from_fn(g.clone(), 3, |r| (-r * r).exp(), TailModel::NONE).unwrap();
            radial_laplacian(&u)
                .iter()
                .zip(g.nodes())
                .take(m)
                .map(|(v, r)| (v - (4.0 * r * r - 6.0) * (-r * r).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(128) / err(256);
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn tail_row_is_exact_for_power_laws() {
        let g = grid(20.0, 64, Clustering::Uniform);
        let u = RadialFunction::from_fn(g, 3, |r| (1.0 + r * r).powi(-2), TailModel::matched(4.0, 20.0, 401f64.powi(-2)))
            .unwrap();
        let lap = radial_laplacian(&u);
        let exact = 4.0 * 3.0 * u.boundary_value() / 400.0;
        assert!((lap.last().unwrap() / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_fits() {
        let g = grid(50.0, 512, Clustering::Uniform);
        let u = RadialFunction::from_fn(g.clone(), 3, |r| (1.0 + r * r).powi(-2), TailModel::NONE).unwrap();
        let (beta, _) = fit_tail_range(&u, 30.0, 50.0).unwrap();
        assert!((beta / 4.0 - 1.0).abs() < 0.02);

        let exact = RadialFunction::from_fn(g.clone(), 3, |r| if r > 0.0 { 2.5 * r.powf(-1.7) } else { 1.0 }, TailModel::NONE);
        let (beta, c) = fit_tail(&exact.unwrap(), 0.2).unwrap();
        assert!((beta - 1.7).abs() < 1e-10 && (c - 2.5).abs() < 1e-10);

        let ind = RadialFunction::from_fn(g, 3, |r| if r <= 1.0 { 1.0 } else { 0.0 }, TailModel::NONE).unwrap();
        assert!(matches!(fit_tail(&ind, 0.2), Err(Error::Fit(_))));
    }

    #[test]
    fn tridiagonal_solve() {
        let lower = [0.0, 1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let upper = [1.0, 0.3, 1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                diag[i] * x[i]
                    + if i > 0 { lower[i] * x[i - 1] } else { 0.0 }
                    + if i < 3 { upper[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let got = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        for (a, b) in got.iter().zip(x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn profile_round_trip() {
        let dir = std::env::temp_dir().join(format!("tfground-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u.csv");
        let g = grid(5.0, 40, Clustering::BoundaryClustered);
        let mut u = RadialFunction::from_fn(g, 2, |r| (-r).exp() / 3.0, TailModel::NONE).unwrap();
        u.mark_monotone(1e-12).unwrap();
        io::write_profile(&path, &u, &io::ProfileSidecar::describe(&u, None)).unwrap();
        let (back, side) = io::read_profile(&path, None).unwrap();
        assert_eq!(back.values(), u.values());
        assert_eq!(back.grid().nodes(), u.grid().nodes());
        assert!(back.is_monotone());
        assert_eq!(side.unwrap().grid.clustering, Some(Clustering::BoundaryClustered));
        std::fs::remove_dir_all(dir).ok();
    }
}
