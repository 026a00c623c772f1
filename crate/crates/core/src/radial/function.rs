// SPDX-License-Identifier: Apache-2.0

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailKind {
    /// Identically zero beyond the last node.
    None,
    /// `coefficient · r^(−exponent)` beyond the last node.
    Algebraic,
}

/// Behaviour of a profile on r > L.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub kind: TailKind,
    pub exponent: f64,
    pub coefficient: f64,
}

impl TailModel {
    pub const NONE: TailModel = TailModel {
        kind: TailKind::None,
        exponent: 0.0,
        coefficient: 0.0,
    };

    pub fn algebraic(exponent: f64, coefficient: f64) -> Self {
        TailModel {
            kind: TailKind::Algebraic,
            exponent,
            coefficient,
        }
    }

    /// Algebraic tail continuous with value `u_l` at radius `l`.
    pub fn matched(exponent: f64, l: f64, u_l: f64) -> Self {
        Self::algebraic(exponent, u_l * l.powf(exponent))
    }

    pub fn is_algebraic(&self) -> bool {
        self.kind == TailKind::Algebraic
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self.kind {
            TailKind::None => 0.0,
            TailKind::Algebraic => self.coefficient * r.powf(-self.exponent),
        }
    }
}

/// Nonnegative radial profile u(|x|) on R^N: nodal values on a grid plus a
/// tail model for r > L.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    dim: usize,
    values: Vec<f64>,
    tail: TailModel,
    monotone: bool,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, dim: usize, values: Vec<f64>, tail: TailModel) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be ≥ 1".into()));
        }
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!(
                "profile value {v} at r = {} is not a finite nonnegative number",
                grid.nodes()[i]
            )));
        }
        if tail.is_algebraic() && !(tail.exponent > 0.0 && tail.coefficient >= 0.0) {
            return Err(Error::Domain(format!(
                "algebraic tail needs exponent > 0 and coefficient ≥ 0, got {} and {}",
                tail.exponent, tail.coefficient
            )));
        }
        Ok(RadialFunction {
            grid,
            dim,
            values,
            tail,
            monotone: false,
        })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, dim: usize, f: impl Fn(f64) -> f64, tail: TailModel) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, dim, values, tail)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> TailModel {
        self.tail
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn center(&self) -> f64 {
        self.values[0]
    }

    pub fn boundary_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// u(r); interpolated on [0, L], tail model beyond. Interpolation
    /// overshoot below zero is clipped.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.grid.length() {
            self.grid.interpolate(&self.values, r).max(0.0)
        } else {
            self.tail.eval(r)
        }
    }

    /// Replaces the nodal values, keeping grid and tail kind; an algebraic
    /// tail is re-matched to the new boundary value.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.grid.clone(), self.dim, values, TailModel::NONE)?;
        out.tail = self.tail;
        if self.tail.is_algebraic() {
            out.rematch_tail();
        }
        Ok(out)
    }

    pub fn with_tail(mut self, tail: TailModel) -> Result<Self> {
        if tail.is_algebraic() && !(tail.exponent > 0.0 && tail.coefficient >= 0.0) {
            return Err(Error::Domain("algebraic tail needs exponent > 0 and coefficient ≥ 0".into()));
        }
        self.tail = tail;
        Ok(self)
    }

    /// Sets the algebraic tail coefficient so the tail meets u(L).
    pub fn rematch_tail(&mut self) {
        if self.tail.is_algebraic() {
            self.tail = TailModel::matched(self.tail.exponent, self.grid.length(), self.boundary_value());
        }
    }

    /// a·u.
    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out.tail.coefficient *= a;
        out
    }

    /// u(x / t) for t > 0, obtained by stretching the grid.
    pub fn dilated(&self, t: f64) -> Self {
        let mut out = self.clone();
        out.grid = Arc::new(self.grid.dilated(t));
        if out.tail.is_algebraic() {
            out.tail.coefficient *= t.powf(self.tail.exponent);
        }
        out
    }

    /// u^s, with the tail mapped accordingly.
    pub fn powf(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.powf(s));
        if out.tail.is_algebraic() {
            out.tail.exponent *= s;
            out.tail.coefficient = out.tail.coefficient.powf(s);
        }
        out.monotone = self.monotone && s > 0.0;
        out
    }

    /// Samples u onto another grid. An algebraic tail keeps its exponent and
    /// is re-matched at the new boundary.
    pub fn resample(&self, grid: Arc<RadialGrid>) -> Self {
        let values: Vec<f64> = grid.nodes().iter().map(|&r| self.eval(r)).collect();
        let mut out = RadialFunction {
            grid,
            dim: self.dim,
            values,
            tail: self.tail,
            monotone: false,
        };
        if self.tail.is_algebraic() {
            out.rematch_tail();
        } else {
            out.tail = TailModel::NONE;
        }
        out
    }

    /// Largest increase u(r_{i+1}) − u(r_i) above `tol`, as (index, rise).
    pub fn monotonicity_violation(&self, tol: f64) -> Option<(usize, f64)> {
        self.values
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i + 1, w[1] - w[0]))
            .filter(|(_, rise)| *rise > tol)
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Marks the profile nonincreasing after checking it with tolerance `tol`.
    pub fn mark_monotone(&mut self, tol: f64) -> Result<()> {
        if let Some((i, rise)) = self.monotonicity_violation(tol) {
            return Err(Error::Monotonicity {
                step: 0,
                rise,
                radius: self.grid.nodes()[i],
            });
        }
        self.monotone = true;
        Ok(())
    }

    /// Largest relative mismatch between the nodal values on the last 10 %
    /// of nodes and the tail model extended inward; `None` without a tail.
    pub fn tail_consistency(&self) -> Option<f64> {
        if !self.tail.is_algebraic() {
            return None;
        }
        let n = self.values.len();
        let first = n - (n / 10).max(1);
        self.grid.nodes()[first..]
            .iter()
            .zip(&self.values[first..])
            .map(|(&r, &v)| {
                let t = self.tail.eval(r);
                (v - t).abs() / t.max(f64::MIN_POSITIVE)
            })
            .reduce(f64::max)
    }
}
