use crate::grid::RadialGrid;

/// Four-point Lagrange interpolation of nodal values at arbitrary coordinates,
/// using the stencil shifted inward near the ends. Points outside the grid are
/// clamped to its ends.
pub fn cubic_interpolate(grid: &RadialGrid, values: &[f64], at: &[f64]) -> Vec<f64> {
    let n = grid.n_nodes;
    let dx = grid.spacing();
    at.iter()
        .map(|&x| {
            let x = x.clamp(0.0, grid.rho_hat_max);
            let cell = ((x / dx).floor() as usize).min(n - 2);
            let start = cell.saturating_sub(1).min(n - 4);
            let s = x / dx - start as f64;
            // nodes at local offsets 0, 1, 2, 3
            let w = [
                -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
                s * (s - 2.0) * (s - 3.0) / 2.0,
                -s * (s - 1.0) * (s - 3.0) / 2.0,
                s * (s - 1.0) * (s - 2.0) / 6.0,
            ];
            (0..4).map(|k| w[k] * values[start + k]).sum()
        })
        .collect()
}
