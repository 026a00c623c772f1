// SPDX-License-Identifier: Apache-2.0

use super::function::RadialFunction;
use super::grid::RadialGrid;

/// Tridiagonal form of the discrete radial Laplacian u'' + (N−1)/r·u'.
///
/// Interior rows use the three-point quadratic through r_{i−1}, r_i, r_{i+1};
/// row 0 is N·u''(0) with the even reflection u(−r_1) = u(r_1). The last row
/// is either the one-sided quadratic through the last three nodes (its entry
/// for u_{M−2} sits in `corner`) or, for an algebraic tail c·r^(−β), the
/// exact diagonal value β(β+2−N)/L². Diagonals are set from the row sums so
/// constants are annihilated exactly.
#[derive(Clone, Debug)]
pub struct Laplacian {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub corner: f64,
    pub tail_row: bool,
}

/// First and second derivative weights at `x` of the quadratic through `xs`.
fn quadratic_weights(xs: [f64; 3], x: f64) -> ([f64; 3], [f64; 3]) {
    let mut d1 = [0.0; 3];
    let mut d2 = [0.0; 3];
    for k in 0..3 {
        let (a, b) = (xs[(k + 1) % 3], xs[(k + 2) % 3]);
        let den = (xs[k] - a) * (xs[k] - b);
        d1[k] = (2.0 * x - a - b) / den;
        d2[k] = 2.0 / den;
    }
    (d1, d2)
}

impl Laplacian {
    pub fn new(grid: &RadialGrid, dim: usize, tail_exponent: Option<f64>) -> Self {
        let r = grid.nodes();
        let n = r.len();
        let nm1 = dim as f64 - 1.0;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let h = r[1];
        diag[0] = -2.0 * dim as f64 / (h * h);
        upper[0] = 2.0 * dim as f64 / (h * h);
        for i in 1..n - 1 {
            let (d1, d2) = quadratic_weights([r[i - 1], r[i], r[i + 1]], r[i]);
            lower[i] = d2[0] + nm1 / r[i] * d1[0];
            upper[i] = d2[2] + nm1 / r[i] * d1[2];
            diag[i] = -(lower[i] + upper[i]);
        }
        let l = r[n - 1];
        let corner = match tail_exponent {
            Some(beta) => {
                diag[n - 1] = beta * (beta + 2.0 - dim as f64) / (l * l);
                0.0
            }
            None => {
                let (d1, d2) = quadratic_weights([r[n - 3], r[n - 2], l], l);
                let corner = d2[0] + nm1 / l * d1[0];
                lower[n - 1] = d2[1] + nm1 / l * d1[1];
                diag[n - 1] = -(corner + lower[n - 1]);
                corner
            }
        };
        Laplacian {
            lower,
            diag,
            upper,
            corner,
            tail_row: tail_exponent.is_some(),
        }
    }

    /// Replaces a one-sided last row by the reflecting condition u'(L) = 0,
    /// which keeps the implicit diffusion matrix diagonally dominant.
    pub fn with_neumann_end(mut self, grid: &RadialGrid) -> Self {
        if self.tail_row {
            return self;
        }
        let r = grid.nodes();
        let n = r.len();
        let h = r[n - 1] - r[n - 2];
        self.corner = 0.0;
        self.lower[n - 1] = 2.0 / (h * h);
        self.diag[n - 1] = -2.0 / (h * h);
        self
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        // Difference form keeps constants in the kernel exactly.
        out[0] = self.upper[0] * (u[1] - u[0]);
        for i in 1..n - 1 {
            out[i] = self.lower[i] * (u[i - 1] - u[i]) + self.upper[i] * (u[i + 1] - u[i]);
        }
        let last = u[n - 1];
        out[n - 1] = if self.tail_row {
            self.diag[n - 1] * last
        } else {
            self.corner * (u[n - 3] - last) + self.lower[n - 1] * (u[n - 2] - last)
        };
        out
    }
}

/// Discrete Δu at the nodes of `u`. An algebraic tail switches the boundary
/// row to the tail's exact Laplacian.
pub fn radial_laplacian(u: &RadialFunction) -> Vec<f64> {
    let tail = u.tail();
    let beta = tail.is_algebraic().then_some(tail.exponent);
    Laplacian::new(u.grid(), u.dim(), beta).apply(u.values())
}

/// Solves the tridiagonal system (lower, diag, upper)·x = rhs by the Thomas
/// algorithm. `lower[0]` and `upper[n−1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    x[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / m;
        }
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}
