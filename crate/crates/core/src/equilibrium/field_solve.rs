use super::solver::{solve_equilibrium_with, EquilibriumProblem, EquilibriumSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::model::field::{ExternalField, OneBody};
use crate::model::hoeffding::{convolve_at, convolve_derivative_at};
use crate::model::interaction::InteractionPotential;
use crate::model::measure::{Grid, GridMeasure};

pub const DEFAULT_CELLS: usize = 1024;
const MAX_ENLARGEMENTS: usize = 6;

/// `[-3 sqrt(beta), 3 sqrt(beta)]` with the default cell count; the radius of
/// the Gaussian-field support is `sqrt(beta)`.
pub fn default_grid(beta: f64) -> Grid {
    Grid::symmetric(3.0 * beta.sqrt(), DEFAULT_CELLS).expect("positive beta")
}

/// Solves for the equilibrium measure of a field, enlarging the window by
/// half its width whenever mass reaches the outer cells.
pub fn solve_field(field: &dyn OneBody, beta: f64, grid: Grid, tol: f64) -> Result<EquilibriumSolution> {
    let mut grid = grid;
    let mut last = None;
    for _ in 0..=MAX_ENLARGEMENTS {
        let problem = EquilibriumProblem::from_fn(grid, |t| field.value(t), beta)?;
        match solve_equilibrium_with(&problem, tol, None, &SolverOptions::default()) {
            Err(e @ Error::WindowTooSmall { .. }) => {
                let center = 0.5 * (grid.left + grid.right);
                let half = 0.75 * (grid.right - grid.left);
                grid = Grid::new(center - half, center + half, grid.n_cells)?;
                log::info!("enlarging equilibrium window to [{}, {}]", grid.left, grid.right);
                last = Some(e);
            }
            other => return other,
        }
    }
    Err(last.expect("loop ran"))
}

/// The field `V = Q + h_mu` seen by the comparison ensemble.
///
/// `h_mu` and its derivative are tabulated on a fine node grid and evaluated by
/// cubic Hermite interpolation; outside the table the convolution is summed
/// directly.
#[derive(Clone, Debug)]
pub struct EffectiveField {
    field: ExternalField,
    interaction: InteractionPotential,
    mu: GridMeasure,
    left: f64,
    spacing: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl EffectiveField {
    pub fn new(field: ExternalField, interaction: InteractionPotential, mu: GridMeasure) -> Self {
        let reach = 10.0 * interaction.sigma_max();
        let left = mu.left() - reach;
        let right = mu.right() + reach;
        let spacing = 2e-3;
        let nodes = ((right - left) / spacing).ceil() as usize + 1;
        let (values, slopes) = if interaction.is_zero() {
            (Vec::new(), Vec::new())
        } else {
            (0..nodes)
                .map(|i| {
                    let t = left + i as f64 * spacing;
                    (
                        convolve_at(&interaction, &mu, t),
                        convolve_derivative_at(&interaction, &mu, t),
                    )
                })
                .unzip()
        };
        Self {
            field,
            interaction,
            mu,
            left,
            spacing,
            values,
            slopes,
        }
    }

    pub fn measure(&self) -> &GridMeasure {
        &self.mu
    }

    pub fn interaction(&self) -> &InteractionPotential {
        &self.interaction
    }

    pub fn base_field(&self) -> &ExternalField {
        &self.field
    }

    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        if self.values.is_empty() {
            return None;
        }
        let pos = (t - self.left) / self.spacing;
        if pos < 0.0 {
            return None;
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return None;
        }
        Some((i, pos - i as f64))
    }

    /// Tabulated `h_mu(t)`.
    pub fn convolution(&self, t: f64) -> f64 {
        if self.interaction.is_zero() {
            return 0.0;
        }
        match self.locate(t) {
            Some((i, s)) => {
                let h = self.spacing;
                let (y0, y1) = (self.values[i], self.values[i + 1]);
                let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * m0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * m1
            }
            None => convolve_at(&self.interaction, &self.mu, t),
        }
    }

    pub fn convolution_derivative(&self, t: f64) -> f64 {
        if self.interaction.is_zero() {
            return 0.0;
        }
        match self.locate(t) {
            Some((i, s)) => {
                let h = self.spacing;
                let (y0, y1) = (self.values[i], self.values[i + 1]);
                let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
                let s2 = s * s;
                ((6.0 * s2 - 6.0 * s) * y0
                    + (3.0 * s2 - 4.0 * s + 1.0) * m0
                    + (-6.0 * s2 + 6.0 * s) * y1
                    + (3.0 * s2 - 2.0 * s) * m1)
                    / h
            }
            None => convolve_derivative_at(&self.interaction, &self.mu, t),
        }
    }
}

impl OneBody for EffectiveField {
    fn value(&self, t: f64) -> f64 {
        self.field.value(t) + self.convolution(t)
    }

    fn derivative(&self, t: f64) -> f64 {
        self.field.derivative(t) + self.convolution_derivative(t)
    }
}
