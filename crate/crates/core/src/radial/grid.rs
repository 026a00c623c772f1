// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::quadrature::gauss;
use crate::special_fn::sphere_area;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::{Arc, Mutex};

/// Minimum number of intervals accepted by [`make_grid`].
pub const MIN_INTERVALS: usize = 32;
/// Points per local interpolation stencil (degree 5).
pub const STENCIL: usize = 6;
/// Fraction of [0, L] covered by a clustered layer.
const LAYER_LENGTH: f64 = 0.05;
/// Fraction of intervals spent in a clustered layer.
const LAYER_NODES: f64 = 0.25;
/// Smallest last-cell width of a graded layer, relative to L; keeps the
/// nodes next to r = L distinct in floating point.
const GRADED_MIN_WIDTH: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clustering {
    Uniform,
    BoundaryClustered,
    OriginAndBoundary,
    /// The layer of `BoundaryClustered`, with nodes and interpolation in
    /// τ = (L − r)^a; built by [`make_graded_grid`].
    BoundaryGraded,
}

impl std::str::FromStr for Clustering {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Clustering::Uniform),
            "boundary-clustered" | "boundary" => Ok(Clustering::BoundaryClustered),
            "origin-and-boundary" | "origin" => Ok(Clustering::OriginAndBoundary),
            "boundary-graded" | "graded" => Ok(Clustering::BoundaryGraded),
            other => Err(Error::Config(format!("unknown clustering '{other}'"))),
        }
    }
}

/// Radii 0 = r_0 < r_1 < … < r_M = L with local degree-5 interpolation and a
/// Gauss panel rule of at least `order` points per interval.
pub struct RadialGrid {
    nodes: Vec<f64>,
    order: usize,
    clustering: Option<Clustering>,
    edge: Option<Edge>,
    weights: Mutex<Vec<(usize, Arc<Vec<f64>>)>>,
}

/// Intervals from `first` on interpolate in τ = (L − r)^exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Edge {
    first: usize,
    exponent: f64,
}

impl Clone for RadialGrid {
    fn clone(&self) -> Self {
        RadialGrid {
            nodes: self.nodes.clone(),
            order: self.order,
            clustering: self.clustering,
            edge: self.edge,
            weights: Mutex::new(Vec::new()),
        }
    }
}

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("intervals", &self.intervals())
            .field("length", &self.length())
            .field("order", &self.order)
            .field("clustering", &self.clustering)
            .finish()
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.order == other.order && self.edge == other.edge
    }
}

pub const DEFAULT_ORDER: usize = 4;

/// Builds a grid on [0, L] with M intervals.
pub fn make_grid(length: f64, intervals: usize, clustering: Clustering) -> Result<RadialGrid> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Config(format!("grid length must be positive, got {length}")));
    }
    if intervals < MIN_INTERVALS {
        return Err(Error::Config(format!(
            "grid needs at least {MIN_INTERVALS} intervals, got {intervals}"
        )));
    }
    let m = intervals;
    let nodes = match clustering {
        Clustering::Uniform => (0..=m).map(|i| length * i as f64 / m as f64).collect(),
        Clustering::BoundaryClustered => {
            let layer = ((m as f64 * LAYER_NODES).round() as usize).max(1);
            let inner = m - layer;
            let inner_len = (1.0 - LAYER_LENGTH) * length;
            let h0 = inner_len / inner as f64;
            let widths = geometric_widths(h0, layer, LAYER_LENGTH * length);
            let mut nodes: Vec<f64> = (0..=inner).map(|i| inner_len * i as f64 / inner as f64).collect();
            push_widths(&mut nodes, widths.iter().copied());
            nodes
        }
        Clustering::BoundaryGraded => {
            return Err(Error::Config("boundary-graded grids need an edge exponent (make_graded_grid)".into()));
        }
        Clustering::OriginAndBoundary => {
            let layer = ((m as f64 * LAYER_NODES).round() as usize).max(1);
            let mid = m - 2 * layer;
            let mid_len = (1.0 - 2.0 * LAYER_LENGTH) * length;
            let h0 = mid_len / mid as f64;
            let widths = geometric_widths(h0, layer, LAYER_LENGTH * length);
            let mut nodes = vec![0.0];
            push_widths(&mut nodes, widths.iter().rev().copied());
            let start = LAYER_LENGTH * length;
            *nodes.last_mut().unwrap() = start;
            for i in 1..=mid {
                nodes.push(start + mid_len * i as f64 / mid as f64);
            }
            push_widths(&mut nodes, widths.iter().copied());
            nodes
        }
    };
    let mut nodes = nodes;
    *nodes.last_mut().unwrap() = length;
    let mut grid = RadialGrid::from_nodes(nodes, DEFAULT_ORDER)?;
    grid.clustering = Some(clustering);
    Ok(grid)
}

/// Boundary layer for profiles that behave like c_0 + c_1 (L − r)^a + … at
/// r = L: the outer 5 % of [0, L] holds a quarter of the intervals, spaced
/// uniformly in τ = (L − r)^a, and interpolation there is polynomial in τ.
pub fn make_graded_grid(length: f64, intervals: usize, exponent: f64) -> Result<RadialGrid> {
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::Config(format!("edge exponent must lie in (0, 1], got {exponent}")));
    }
    let base = make_grid(length, intervals, Clustering::Uniform)?;
    let m = intervals;
    let layer = ((m as f64 * LAYER_NODES).round() as usize).max(2);
    let inner = m - layer;
    let depth = LAYER_LENGTH * length;
    let max_kappa = (LAYER_LENGTH / GRADED_MIN_WIDTH).ln() / (layer as f64).ln();
    let kappa = (1.0 / exponent).min(max_kappa);
    let mut nodes: Vec<f64> = (0..=inner).map(|i| (length - depth) * i as f64 / inner as f64).collect();
    nodes.extend((1..layer).rev().map(|j| length - depth * (j as f64 / layer as f64).powf(kappa)));
    nodes.push(length);
    let mut grid = RadialGrid::from_nodes(nodes, base.order)?;
    grid.clustering = Some(Clustering::BoundaryGraded);
    grid.edge = Some(Edge { first: inner, exponent });
    Ok(grid)
}

/// Widths h0·ρ^k, k = 1..=count, with ρ < 1 chosen so they sum to `total`.
fn geometric_widths(h0: f64, count: usize, total: f64) -> Vec<f64> {
    let sum = |rho: f64| (1..=count).map(|k| h0 * rho.powi(k as i32)).sum::<f64>();
    let rho = if sum(1.0) <= total {
        total / (h0 * count as f64)
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sum(mid) > total {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (1..=count).map(|k| h0 * rho.powi(k as i32)).collect()
}

fn push_widths(nodes: &mut Vec<f64>, widths: impl Iterator<Item = f64>) {
    for w in widths {
        let last = *nodes.last().unwrap();
        nodes.push(last + w);
    }
}

impl RadialGrid {
    /// Grid from explicit nodes; requires r_0 = 0, strict increase and at
    /// least [`STENCIL`] nodes.
    pub fn from_nodes(nodes: Vec<f64>, order: usize) -> Result<Self> {
        if nodes.len() < STENCIL {
            return Err(Error::Config(format!(
                "grid needs at least {STENCIL} nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Config(format!("first node must be 0, got {}", nodes[0])));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::Config(format!(
                "grid nodes must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        if order < 2 {
            return Err(Error::Config(format!("panel rule order must be ≥ 2, got {order}")));
        }
        Ok(RadialGrid {
            nodes,
            order,
            clustering: None,
            edge: None,
            weights: Mutex::new(Vec::new()),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of intervals M.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn length(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn clustering(&self) -> Option<Clustering> {
        self.clustering
    }

    pub fn set_clustering(&mut self, clustering: Option<Clustering>) {
        self.clustering = clustering;
    }

    /// Same grid with every node multiplied by `t`.
    pub fn dilated(&self, t: f64) -> RadialGrid {
        RadialGrid {
            nodes: self.nodes.iter().map(|r| r * t).collect(),
            order: self.order,
            clustering: self.clustering,
            edge: self.edge,
            weights: Mutex::new(Vec::new()),
        }
    }

    /// Interval index j with r_j ≤ r < r_{j+1}, clamped to [0, M−1].
    pub fn locate(&self, r: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x <= r);
        idx.saturating_sub(1).min(self.intervals() - 1)
    }

    /// First node of the interpolation stencil used on interval `j`.
    pub fn stencil_start(&self, j: usize) -> usize {
        j.saturating_sub(2).min(self.nodes.len() - STENCIL)
    }

    /// Exponent a of the edge variable τ = (L − r)^a, on graded grids.
    pub fn edge_exponent(&self) -> Option<f64> {
        self.edge.map(|e| e.exponent)
    }

    /// (first interval, exponent) of the τ-interpolated layer.
    pub fn edge(&self) -> Option<(usize, f64)> {
        self.edge.map(|e| (e.first, e.exponent))
    }

    /// Interpolates in τ = (L − r)^exponent on intervals `first..`.
    pub fn with_edge(mut self, first: usize, exponent: f64) -> Result<Self> {
        if first >= self.intervals() || !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::Config(format!(
                "edge layer from interval {first} with exponent {exponent} does not fit a grid of {} intervals",
                self.intervals()
            )));
        }
        self.edge = Some(Edge { first, exponent });
        self.weights = Mutex::new(Vec::new());
        Ok(self)
    }

    /// Lagrange weights of the stencil of interval `j` at `s`.
    pub fn basis(&self, j: usize, s: f64) -> [f64; STENCIL] {
        let start = self.stencil_start(j);
        let nodes = &self.nodes[start..start + STENCIL];
        let mut x = [0.0; STENCIL];
        x.copy_from_slice(nodes);
        let mut s = s;
        if let Some(e) = self.edge.filter(|e| j >= e.first) {
            let l = self.length();
            let tau = |r: f64| (l - r).max(0.0).powf(e.exponent);
            x.iter_mut().for_each(|v| *v = tau(*v));
            s = tau(s);
        }
        let mut out = [0.0; STENCIL];
        for k in 0..STENCIL {
            let mut num = 1.0;
            let mut den = 1.0;
            for m in 0..STENCIL {
                if m != k {
                    num *= s - x[m];
                    den *= x[k] - x[m];
                }
            }
            out[k] = num / den;
        }
        out
    }

    /// Interpolates nodal `values` at `r` ∈ [0, L].
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let j = self.locate(r);
        let start = self.stencil_start(j);
        let b = self.basis(j, r);
        b.iter().zip(&values[start..start + STENCIL]).map(|(w, v)| w * v).sum()
    }

    /// Gauss points per interval for volume integrals in dimension `dim`.
    pub fn panel_points(&self, dim: usize) -> usize {
        self.order.max((dim + STENCIL).div_ceil(2))
    }

    /// Nodal weights ω_k with Σ ω_k f(r_k) = ∫_{B_L} I[f] dx for the
    /// interpolant I[f]; exact for the piecewise degree-5 interpolant.
    pub fn volume_weights(&self, dim: usize) -> Arc<Vec<f64>> {
        let mut cache = self.weights.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((_, w)) = cache.iter().find(|(d, _)| *d == dim) {
            return w.clone();
        }
        let w = Arc::new(self.compute_weights(dim));
        cache.push((dim, w.clone()));
        w
    }

    fn compute_weights(&self, dim: usize) -> Vec<f64> {
        let rule = gauss(self.panel_points(dim));
        let omega = sphere_area(dim);
        let mut w = vec![0.0; self.nodes.len()];
        for j in 0..self.intervals() {
            let (a, b) = (self.nodes[j], self.nodes[j + 1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let start = self.stencil_start(j);
            for (x, gw) in rule.nodes.iter().zip(&rule.weights) {
                let s = mid + half * x;
                let f = gw * half * omega * s.powi(dim as i32 - 1);
                for (k, l) in self.basis(j, s).iter().enumerate() {
                    w[start + k] += f * l;
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_nodes() {
        let g = make_grid(1.0, 64, Clustering::Uniform).unwrap();
        for (i, r) in g.nodes().iter().enumerate() {
            assert!((r - i as f64 / 64.0).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_clustering_rule() {
        let g = make_grid(PI, 256, Clustering::BoundaryClustered).unwrap();
        let n = g.nodes();
        assert_eq!(n.len(), 257);
        assert!(n[256] - n[255] < PI / 2048.0);
        assert_eq!(n[256], PI);
        let in_layer = n.iter().filter(|&&r| r > 0.95 * PI * (1.0 + 1e-12)).count();
        assert_eq!(in_layer, 64);
    }

    #[test]
    fn origin_and_boundary_rule() {
        let g = make_grid(50.0, 512, Clustering::OriginAndBoundary).unwrap();
        let n = g.nodes();
        assert!(n[1] < 50.0 / 5120.0);
        assert!(n[512] - n[511] < 50.0 / 5120.0);
        assert_eq!(n[512], 50.0);
    }

    #[test]
    fn too_few_intervals() {
        assert!(matches!(make_grid(1.0, 16, Clustering::Uniform), Err(Error::Config(_))));
    }

    #[test]
    fn interpolation_reproduces_quintics() {
        let g = make_grid(2.0, 40, Clustering::OriginAndBoundary).unwrap();
        let f = |r: f64| 1.0 - 2.0 * r + 0.5 * r.powi(3) - 0.1 * r.powi(5);
        let v: Vec<f64> = g.nodes().iter().map(|&r| f(r)).collect();
        for r in [0.0, 0.013, 0.7, 1.33, 1.999, 2.0] {
            assert!((g.interpolate(&v, r) - f(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn graded_layer_is_uniform_in_tau() {
        let a = 0.5;
        let g = make_graded_grid(1.0, 128, a).unwrap();
        let (first, e) = g.edge().unwrap();
        assert_eq!(e, a);
        assert_eq!(g.clustering(), Some(Clustering::BoundaryGraded));
        let n = g.nodes();
        assert_eq!(n[128], 1.0);
        assert!((1.0 - n[first] - LAYER_LENGTH).abs() < 1e-12);
        let tau: Vec<f64> = n[first..].iter().map(|&r| (1.0 - r).powf(a)).collect();
        let step = tau[0] - tau[1];
        for w in tau.windows(2) {
            assert!(((w[0] - w[1]) - step).abs() < 1e-12 * step.max(1.0));
        }
    }

    #[test]
    fn graded_interpolation_reproduces_edge_powers() {
        let a = 0.3;
        let g = make_graded_grid(2.0, 160, a).unwrap();
        let f = |r: f64| {
            let t = (2.0 - r).powf(a);
            1.0 + 0.7 * t - 0.2 * t.powi(3) + 0.05 * t.powi(5)
        };
        let v: Vec<f64> = g.nodes().iter().map(|&r| f(r)).collect();
        for r in [1.9, 1.95, 1.99, 1.9999, 2.0] {
            assert!((g.interpolate(&v, r) - f(r)).abs() < 1e-11, "r = {r}");
        }
    }

    #[test]
    fn graded_grid_rejects_bad_exponents() {
        for a in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(make_graded_grid(1.0, 64, a), Err(Error::Config(_))));
        }
        assert!(matches!(make_grid(1.0, 64, Clustering::BoundaryGraded), Err(Error::Config(_))));
    }
}
