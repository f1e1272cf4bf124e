use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::ensemble::Configuration;
use crate::model::measure::{GridMeasure, DEFAULT_SUPPORT_THRESHOLD};

/// Fraction of the support, centered, that counts as bulk.
pub const BULK_FRACTION: f64 = 0.6;

/// Unfolded positions and the bulk gaps between them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample {
    pub unfolded_points: Vec<f64>,
    pub gaps: Vec<f64>,
}

/// Distribution function of a grid measure with precomputed prefix sums.
#[derive(Clone, Debug)]
pub struct CdfTable {
    left: f64,
    dx: f64,
    weights: Vec<f64>,
    prefix: Vec<f64>,
}

impl CdfTable {
    pub fn new(mu: &GridMeasure) -> Self {
        let weights = mu.weights().to_vec();
        let mut prefix = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for w in &weights {
            acc += w;
            prefix.push(acc);
        }
        Self {
            left: mu.left(),
            dx: mu.cell_width(),
            weights,
            prefix,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - self.left) / self.dx;
        if pos <= 0.0 {
            return 0.0;
        }
        let n = self.weights.len();
        if pos >= n as f64 {
            return self.prefix[n];
        }
        let c = pos.floor() as usize;
        self.prefix[c] + (pos - c as f64) * self.weights[c]
    }
}

/// Bulk window: the central [`BULK_FRACTION`] of the support of `mu`.
pub fn bulk_window(mu: &GridMeasure) -> Result<(f64, f64)> {
    let (lo, hi) = mu
        .support(DEFAULT_SUPPORT_THRESHOLD)
        .ok_or_else(|| invalid("measure has empty support"))?;
    let center = 0.5 * (lo + hi);
    let half = 0.5 * BULK_FRACTION * (hi - lo);
    Ok((center - half, center + half))
}

/// Unfolds many configurations with one CDF table.
pub struct Unfolder {
    cdf: CdfTable,
    bulk: (f64, f64),
}

impl Unfolder {
    pub fn new(mu: &GridMeasure) -> Result<Self> {
        Ok(Self {
            cdf: CdfTable::new(mu),
            bulk: bulk_window(mu)?,
        })
    }

    pub fn bulk(&self) -> (f64, f64) {
        self.bulk
    }

    pub fn unfold(&self, config: &Configuration) -> SpacingSample {
        let n = config.len();
        let x = &config.positions;
        let nf = n as f64;
        let unfolded: Vec<f64> = x.iter().map(|&xi| nf * self.cdf.eval(xi)).collect();
        let extreme = unfolded
            .iter()
            .filter(|y| (*y / nf - 0.5).abs() > 0.5 - 1e-9)
            .count();
        if extreme * 10 > n {
            warn!("{extreme} of {n} points fall outside the support of the unfolding measure");
        }
        let (lo, hi) = self.bulk;
        let gaps = (1..n)
            .filter(|&i| x[i - 1] >= lo && x[i] <= hi)
            .map(|i| unfolded[i] - unfolded[i - 1])
            .collect();
        SpacingSample {
            unfolded_points: unfolded,
            gaps,
        }
    }
}

/// Maps sorted positions through `N F_mu` and keeps the gaps whose endpoints
/// both lie in the bulk window.
pub fn unfold(config: &Configuration, mu: &GridMeasure) -> Result<SpacingSample> {
    if config.positions.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("positions must be sorted before unfolding"));
    }
    Ok(Unfolder::new(mu)?.unfold(config))
}

/// Bulk gaps of every configuration, concatenated in sample order.
pub fn bulk_gaps(samples: &[Configuration], mu: &GridMeasure) -> Result<Vec<f64>> {
    let unfolder = Unfolder::new(mu)?;
    Ok(samples
        .iter()
        .flat_map(|c| unfolder.unfold(&c.clone().sorted()).gaps)
        .collect())
}
