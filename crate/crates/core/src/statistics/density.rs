use log::warn;
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};
use crate::model::ensemble::Configuration;
use crate::model::measure::{Grid, GridMeasure};

/// Below this many configurations the estimate is flagged as noisy.
pub const MIN_CONFIGURATIONS: usize = 100;

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Default bandwidth: two mean spacings of the pooled points, i.e. twice the
/// spread divided by `N`. Averages out the `N` density ripples while staying
/// well below the scale of the limiting profile.
pub fn default_bandwidth(samples: &[Configuration]) -> f64 {
    let n = samples.first().map_or(1, |c| c.len()).max(1);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in samples {
        for &x in &c.positions {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let spread = (hi - lo).max(f64::EPSILON);
    2.0 * spread / n as f64
}

/// Gaussian kernel-density estimate of the one-point function. Each point
/// contributes the exact kernel mass of every cell; the result is renormalized
/// so that kernel mass falling off the grid is redistributed.
pub fn empirical_density(samples: &[Configuration], grid: Grid, bandwidth: Option<f64>) -> Result<GridMeasure> {
    let count: usize = samples.iter().map(|c| c.len()).sum();
    if count == 0 {
        return Err(invalid("empirical density of an empty sample set"));
    }
    if samples.len() < MIN_CONFIGURATIONS {
        warn!(
            "density estimate from {} configurations (< {MIN_CONFIGURATIONS}) is noisy",
            samples.len()
        );
    }
    let bw = bandwidth.unwrap_or_else(|| default_bandwidth(samples));
    if !(bw.is_finite() && bw > 0.0) {
        return Err(invalid("bandwidth must be positive"));
    }
    let dx = grid.cell_width();
    let n_cells = grid.n_cells;
    let reach = 8.0 * bw;
    let mut masses = vec![0.0; n_cells];
    let mut edge_cdf = Vec::new();
    for c in samples {
        for &x in &c.positions {
            let first = (((x - reach - grid.left) / dx).floor().max(0.0) as usize).min(n_cells);
            let last = (((x + reach - grid.left) / dx).ceil().max(0.0) as usize).min(n_cells);
            if first >= last {
                continue;
            }
            edge_cdf.clear();
            edge_cdf.extend((first..=last).map(|e| normal_cdf((grid.left + e as f64 * dx - x) / bw)));
            for (k, cell) in (first..last).enumerate() {
                masses[cell] += edge_cdf[k + 1] - edge_cdf[k];
            }
        }
    }
    let total: f64 = masses.iter().sum();
    if total <= 0.0 {
        return Err(invalid("all sample points lie outside the density grid"));
    }
    GridMeasure::from_masses(grid, masses)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_configuration_gives_narrow_bumps() {
        let samples = vec![Configuration::new(vec![-1.0, 1.0]); 5];
        let grid = Grid::symmetric(2.0, 400).unwrap();
        let mu = empirical_density(&samples, grid, Some(0.02)).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        assert!((mu.cdf(-0.9) - 0.5).abs() < 1e-6);
        assert!(mu.cdf(-1.1) < 1e-6);
        assert!(mu.density_at(0.0) < 1e-12);
        assert!(mu.density_at(1.0) > 5.0);
    }

    #[test]
    fn empty_input_is_rejected() {
        let grid = Grid::symmetric(1.0, 10).unwrap();
        assert!(empirical_density(&[], grid, None).is_err());
    }

    #[test]
    fn permutation_does_not_matter() {
        let a = vec![Configuration::new(vec![0.3, -0.2, 0.9]); 3];
        let b = vec![Configuration::new(vec![0.9, 0.3, -0.2]); 3];
        let grid = Grid::symmetric(2.0, 200).unwrap();
        let ma = empirical_density(&a, grid, Some(0.1)).unwrap();
        let mb = empirical_density(&b, grid, Some(0.1)).unwrap();
        assert!(ma.l1_distance(&mb) < 1e-14);
    }
}
