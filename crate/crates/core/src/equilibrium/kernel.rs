use rayon::prelude::*;

use crate::model::measure::Grid;

/// Cell-averaged logarithmic kernel `K(c, d) = -log|t_c - t_d|` on a uniform
/// grid. Off-diagonal entries use the midpoints; the diagonal is the exact
/// cell average `1 - log(dx / 2)`. Stored as its first Toeplitz row.
#[derive(Clone, Debug, PartialEq)]
pub struct LogKernel {
    grid: Grid,
    lags: Vec<f64>,
}

impl LogKernel {
    pub fn new(grid: Grid) -> Self {
        let dx = grid.cell_width();
        let lags = (0..grid.n_cells)
            .map(|k| {
                if k == 0 {
                    1.0 - (dx / 2.0).ln()
                } else {
                    -(k as f64 * dx).ln()
                }
            })
            .collect();
        Self { grid, lags }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn entry(&self, c: usize, d: usize) -> f64 {
        self.lags[c.abs_diff(d)]
    }

    /// Dense copy, mostly for inspection.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.grid.n_cells;
        (0..n).map(|c| (0..n).map(|d| self.entry(c, d)).collect()).collect()
    }

    /// `K w`. Each row is summed in index order, so the result does not depend
    /// on the number of worker threads.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let active: Vec<(usize, f64)> = w
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(d, v)| (d, *v))
            .collect();
        let row = |c: usize| -> f64 { active.iter().map(|&(d, v)| self.lags[c.abs_diff(d)] * v).sum() };
        let n = self.grid.n_cells;
        if n >= 256 {
            (0..n).into_par_iter().map(row).collect()
        } else {
            (0..n).map(row).collect()
        }
    }

    /// `<w, K w>`.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        self.apply(w).iter().zip(w).map(|(a, b)| a * b).sum()
    }
}
