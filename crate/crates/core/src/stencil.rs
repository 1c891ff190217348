//! Finite-difference complex Hessians of U(n)-invariant functions.
//!
//! For a radial function `v(x)` with `x = artanh |z|` the form `i∂∂̄v` is diagonal
//! in the radial/spherical split. Its eigenvalues in Euclidean coordinates are
//!
//! ```text
//!   radial    = cosh⁴x / 4 · P_rad v,   P_rad v = v'' + 2 coth(2x) v'
//!   spherical = cosh²x / 4 · P_sph v,   P_sph v = 2 coth(x) v'
//! ```
//!
//! and both reduce to `2 v''(0)` at the origin. The model metrics have eigenvalues
//! `(n+1) cosh⁴x` and `(n+1) cosh²x`, so the ratios against them are simply
//! `P v / (4(n+1))`.

use crate::grid::RadialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Radial,
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Second order everywhere; the spherical first derivative is centred.
    Central,
    /// Nonnegative neighbour weights in every row. The spherical first
    /// derivative is a forward difference and only first order.
    Monotone,
}

/// Two-point flux weights of `P` on rows `0..n-1` (every node but the last).
///
/// Row `i` evaluates as `lower[i]·(v[i-1] - v[i]) + upper[i]·(v[i+1] - v[i])`,
/// which annihilates constants exactly in floating point.
#[derive(Debug, Clone)]
pub struct FluxWeights {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl FluxWeights {
    pub fn new(grid: &RadialGrid, component: Component, stencil: Stencil) -> Self {
        let rows = grid.n_nodes - 1;
        let dx = grid.spacing();
        let mut lower = vec![0.0; rows];
        let mut upper = vec![0.0; rows];
        // origin: symmetric ghost node, v''(0) ≈ 2 (v1 - v0) / dx²
        upper[0] = 4.0 / (dx * dx);
        for i in 1..rows {
            let x = grid.node(i);
            match component {
                Component::Radial => {
                    let s = (2.0 * x).sinh();
                    lower[i] = (2.0 * x - dx).sinh() / (s * dx * dx);
                    upper[i] = (2.0 * x + dx).sinh() / (s * dx * dx);
                }
                Component::Spherical => {
                    let c = 2.0 / (x.tanh() * dx);
                    match stencil {
                        Stencil::Central => {
                            lower[i] = -0.5 * c;
                            upper[i] = 0.5 * c;
                        }
                        Stencil::Monotone => upper[i] = c,
                    }
                }
            }
        }
        Self { lower, upper }
    }

    pub fn row(&self, v: &[f64], i: usize) -> f64 {
        let up = self.upper[i] * (v[i + 1] - v[i]);
        if i == 0 {
            up
        } else {
            up + self.lower[i] * (v[i - 1] - v[i])
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|&w| w >= 0.0)
    }
}

/// `P v` at every node; the last node uses second-order one-sided differences.
pub fn apply(grid: &RadialGrid, v: &[f64], component: Component, stencil: Stencil) -> Vec<f64> {
    let n = grid.n_nodes;
    assert_eq!(v.len(), n, "field length does not match grid");
    let weights = FluxWeights::new(grid, component, stencil);
    let mut out: Vec<f64> = (0..n - 1).map(|i| weights.row(v, i)).collect();
    out.push(one_sided_last(grid, v, component));
    out
}

fn one_sided_last(grid: &RadialGrid, v: &[f64], component: Component) -> f64 {
    let n = grid.n_nodes;
    let dx = grid.spacing();
    let x = grid.node(n - 1);
    let (a, b, c, d) = (v[n - 1], v[n - 2], v[n - 3], v[n - 4]);
    let first = (3.0 * a - 4.0 * b + c) / (2.0 * dx);
    match component {
        Component::Radial => {
            let second = (2.0 * a - 5.0 * b + 4.0 * c - d) / (dx * dx);
            second + 2.0 * first / (2.0 * x).tanh()
        }
        Component::Spherical => 2.0 * first / x.tanh(),
    }
}

/// Euclidean-to-grid Jacobian of each eigenvalue: `cosh⁴x / 4` or `cosh²x / 4`.
pub fn flat_jacobian(x: f64, component: Component) -> f64 {
    let c2 = x.cosh().powi(2);
    match component {
        Component::Radial => 0.25 * c2 * c2,
        Component::Spherical => 0.25 * c2,
    }
}

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `sub[i]` multiplies `x[i-1]` in row `i`, `sup[i]` multiplies `x[i+1]`.
/// Intended for the diagonally dominant Jacobians of the scheme; no pivoting.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    c[0] = if n > 1 { sup[0] / beta } else { 0.0 };
    rhs[0] /= beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if i + 1 < n {
            c[i] = sup[i] / beta;
        }
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}
