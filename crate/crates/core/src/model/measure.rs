//! Probability measures carried by a uniform grid of cells.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on the total mass of a [`GridMeasure`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Cells with weight above this count as support.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-12;

/// Uniform cell layout on `[left, right]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub left: f64,
    pub right: f64,
    pub n_cells: usize,
}

impl Grid {
    pub fn new(left: f64, right: f64, n_cells: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(invalid(format!("grid bounds [{left}, {right}] are not an interval")));
        }
        if n_cells == 0 {
            return Err(invalid("grid needs at least one cell"));
        }
        Ok(Self { left, right, n_cells })
    }

    /// Symmetric window `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_cells: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_cells)
    }

    #[inline]
    pub fn cell_width(&self) -> f64 {
        (self.right - self.left) / self.n_cells as f64
    }

    #[inline]
    pub fn midpoint(&self, c: usize) -> f64 {
        self.left + (c as f64 + 0.5) * self.cell_width()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n_cells).map(|c| self.midpoint(c)).collect()
    }

    /// Index of the cell containing `x`, if any.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if x < self.left || x > self.right {
            return None;
        }
        let c = ((x - self.left) / self.cell_width()).floor() as usize;
        Some(c.min(self.n_cells - 1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    grid: Grid,
    weights: Vec<f64>,
}

impl GridMeasure {
    /// Wraps already-normalized weights; rejects negative, non-finite or
    /// non-normalized input.
    pub fn new(grid: Grid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.n_cells {
            return Err(invalid(format!(
                "{} weights for a grid of {} cells",
                weights.len(),
                grid.n_cells
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("measure weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { grid, weights })
    }

    /// Normalizes nonnegative masses to total one.
    pub fn from_masses(grid: Grid, masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("measure weights must be finite and nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(invalid("measure has zero total mass"));
        }
        let weights = masses.into_iter().map(|w| w / total).collect();
        Self::new(grid, weights)
    }

    /// Cell masses from a cumulative distribution function.
    pub fn from_cdf(grid: Grid, cdf: impl Fn(f64) -> f64) -> Result<Self> {
        let dx = grid.cell_width();
        let masses = (0..grid.n_cells)
            .map(|c| {
                let a = grid.left + c as f64 * dx;
                (cdf(a + dx) - cdf(a)).max(0.0)
            })
            .collect();
        Self::from_masses(grid, masses)
    }

    /// Single-cell measure whose midpoint is `at`.
    pub fn point_mass(at: f64, half_width: f64) -> Self {
        Self {
            grid: Grid {
                left: at - half_width,
                right: at + half_width,
                n_cells: 1,
            },
            weights: vec![1.0],
        }
    }

    /// Uniform weights over the whole grid.
    pub fn uniform(grid: Grid) -> Self {
        let w = 1.0 / grid.n_cells as f64;
        Self {
            grid,
            weights: vec![w; grid.n_cells],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }
    pub fn left(&self) -> f64 {
        self.grid.left
    }
    pub fn right(&self) -> f64 {
        self.grid.right
    }
    pub fn n_cells(&self) -> usize {
        self.grid.n_cells
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn cell_width(&self) -> f64 {
        self.grid.cell_width()
    }
    pub fn midpoint(&self, c: usize) -> f64 {
        self.grid.midpoint(c)
    }
    pub fn midpoints(&self) -> Vec<f64> {
        self.grid.midpoints()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Piecewise-constant density values per cell.
    pub fn densities(&self) -> Vec<f64> {
        let dx = self.cell_width();
        self.weights.iter().map(|w| w / dx).collect()
    }

    /// Density at `x`, linearly interpolated between cell midpoints.
    pub fn density_at(&self, x: f64) -> f64 {
        let dx = self.cell_width();
        let n = self.n_cells();
        if x < self.left() || x > self.right() {
            return 0.0;
        }
        let pos = (x - self.left()) / dx - 0.5;
        if pos <= 0.0 {
            return self.weights[0] / dx;
        }
        let i = pos.floor() as usize;
        if i + 1 >= n {
            return self.weights[n - 1] / dx;
        }
        let frac = pos - i as f64;
        ((1.0 - frac) * self.weights[i] + frac * self.weights[i + 1]) / dx
    }

    /// Distribution function, linear within each cell.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.left() {
            return 0.0;
        }
        if x >= self.right() {
            return 1.0;
        }
        let dx = self.cell_width();
        let pos = (x - self.left()) / dx;
        let c = (pos.floor() as usize).min(self.n_cells() - 1);
        let below: f64 = self.weights[..c].iter().sum();
        (below + (pos - c as f64) * self.weights[c]).min(1.0)
    }

    /// `\int f dmu` by midpoint evaluation.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(c, w)| w * f(self.midpoint(c)))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|t| t)
    }

    /// Outer edges of the cells with weight above `threshold`.
    pub fn support(&self, threshold: f64) -> Option<(f64, f64)> {
        let first = self.weights.iter().position(|w| *w > threshold)?;
        let last = self.weights.iter().rposition(|w| *w > threshold)?;
        let dx = self.cell_width();
        Some((
            self.left() + first as f64 * dx,
            self.left() + (last + 1) as f64 * dx,
        ))
    }

    /// Mass in the outermost `fraction` of cells on each side.
    pub fn edge_mass(&self, fraction: f64) -> f64 {
        let n = self.n_cells();
        let k = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
        let low: f64 = self.weights[..k].iter().sum();
        let high: f64 = self.weights[n - k..].iter().sum();
        low + high
    }

    /// Largest `|w_c - w_{mirror(c)}|`.
    pub fn mirror_asymmetry(&self) -> f64 {
        let n = self.n_cells();
        (0..n)
            .map(|c| (self.weights[c] - self.weights[n - 1 - c]).abs())
            .fold(0.0, f64::max)
    }

    /// L1 distance between the piecewise-constant densities. The grids may
    /// differ; the integral runs over the merged set of cell edges.
    pub fn l1_distance(&self, other: &GridMeasure) -> f64 {
        if self.grid == other.grid {
            return self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (a - b).abs())
                .sum();
        }
        let mut edges: Vec<f64> = (0..=self.n_cells())
            .map(|i| self.left() + i as f64 * self.cell_width())
            .chain((0..=other.n_cells()).map(|i| other.left() + i as f64 * other.cell_width()))
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let piece = |m: &GridMeasure, x: f64| -> f64 {
            match m.grid.cell_of(x) {
                Some(c) => m.weights[c] / m.cell_width(),
                None => 0.0,
            }
        };
        edges
            .windows(2)
            .map(|e| {
                let mid = 0.5 * (e[0] + e[1]);
                (piece(self, mid) - piece(other, mid)).abs() * (e[1] - e[0])
            })
            .sum()
    }
}

/// The semicircle law of radius `r`, with density `2 / (pi r^2) sqrt(r^2 - t^2)`.
pub fn semicircle_cdf(radius: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        let x = (t / radius).clamp(-1.0, 1.0);
        0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / std::f64::consts::PI
    }
}

pub fn semicircle_density(radius: f64, t: f64) -> f64 {
    let r2 = radius * radius;
    if t * t >= r2 {
        0.0
    } else {
        2.0 / (std::f64::consts::PI * r2) * (r2 - t * t).sqrt()
    }
}
