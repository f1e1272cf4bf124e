use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::ensemble::Configuration;
use crate::model::measure::GridMeasure;
use crate::numerics::batch_means;

/// Smooth test functions for linear statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SmoothFunction {
    Constant { value: f64 },
    Cos { frequency: f64 },
    Sin { frequency: f64 },
    /// `c tanh(t / c)`: the identity near the origin, bounded by `c`.
    CutoffLinear { cutoff: f64 },
    Bump { center: f64, radius: f64 },
}

impl SmoothFunction {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Cos { frequency } => (frequency * t).cos(),
            Self::Sin { frequency } => (frequency * t).sin(),
            Self::CutoffLinear { cutoff } => cutoff * (t / cutoff).tanh(),
            Self::Bump { center, radius } => {
                let r = (t - center) / radius;
                let q = 1.0 - r * r;
                if q <= 0.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / q).exp()
                }
            }
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Self::Constant { value } => format!("const({value})"),
            Self::Cos { frequency } => format!("cos({frequency}t)"),
            Self::Sin { frequency } => format!("sin({frequency}t)"),
            Self::CutoffLinear { cutoff } => format!("{cutoff}tanh(t/{cutoff})"),
            Self::Bump { center, radius } => format!("bump(c={center},r={radius})"),
        }
    }
}

/// Count, sum and sum of squares; merging is associative and commutative up
/// to rounding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        iter.into_iter().for_each(|v| m.push(v));
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub mean: f64,
    pub mean_std_error: f64,
    pub variance: f64,
    pub variance_std_error: f64,
    pub n_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub function: String,
    pub rows: Vec<ConcentrationRow>,
    /// `max variance / min variance`.
    pub spread: f64,
    /// `spread <= 2`.
    pub bounded: bool,
}

/// `sum_j f(x_j) - N int f dmu` for each configuration.
pub fn centered_linear_statistic(samples: &[Configuration], f: &SmoothFunction, mu: &GridMeasure) -> Vec<f64> {
    let mean = mu.integrate(|t| f.value(t));
    samples
        .iter()
        .map(|c| {
            let mut x = c.positions.clone();
            x.sort_by(f64::total_cmp);
            x.iter().map(|&t| f.value(t)).sum::<f64>() - x.len() as f64 * mean
        })
        .collect()
}

/// Variance of the centered linear statistic for each `(samples, mu)` pair,
/// typically one per `N`.
pub fn concentration_check(f: &SmoothFunction, sets: &[(&[Configuration], &GridMeasure)]) -> Result<ConcentrationReport> {
    if sets.is_empty() {
        return Err(invalid("concentration check needs at least one sample set"));
    }
    let rows = sets
        .iter()
        .map(|(samples, mu)| {
            let n = samples.first().map(|c| c.len()).ok_or_else(|| invalid("empty sample set"))?;
            let y = centered_linear_statistic(samples, f, mu);
            let moments: Moments = y.iter().copied().collect();
            let (mean, mean_se) = batch_means(&y, 20);
            let mean_all = moments.mean();
            let dev: Vec<f64> = y.iter().map(|v| (v - mean_all).powi(2)).collect();
            let (_, var_se) = batch_means(&dev, 20);
            Ok(ConcentrationRow {
                n,
                mean,
                mean_std_error: mean_se,
                variance: moments.variance(),
                variance_std_error: var_se,
                n_samples: samples.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.variance).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.variance).fold(f64::INFINITY, f64::min);
    let spread = if max == 0.0 { 1.0 } else { max / min };
    Ok(ConcentrationReport {
        function: f.descriptor(),
        rows,
        spread,
        bounded: spread <= 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::measure::{semicircle_cdf, Grid};
    use crate::samplers::tridiagonal_draws;

    #[test]
    fn constant_function_has_zero_variance() {
        let mu = GridMeasure::from_cdf(Grid::symmetric(2.0, 256).unwrap(), semicircle_cdf(2f64.sqrt())).unwrap();
        let s = tridiagonal_draws(10, 2.0, 0, 40).unwrap();
        let r = concentration_check(&SmoothFunction::Constant { value: 3.0 }, &[(&s, &mu)]).unwrap();
        assert!(r.rows[0].variance.abs() < 1e-20);
        assert!(r.rows[0].mean.abs() < 1e-9);
        assert!(r.bounded);
    }

    #[test]
    fn moments_merge_associatively() {
        let a: Moments = [1.0, 2.0].into_iter().collect();
        let b: Moments = [3.5].into_iter().collect();
        let c: Moments = [-1.0, 0.25, 4.0].into_iter().collect();
        let left = a.merge(&b).merge(&c);
        let right = a.merge(&b.merge(&c));
        assert_eq!(left, right);
        let all: Moments = [1.0, 2.0, 3.5, -1.0, 0.25, 4.0].into_iter().collect();
        assert!((left.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn descriptors_round_trip_through_json() {
        let f = SmoothFunction::CutoffLinear { cutoff: 2.0 };
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<SmoothFunction>(&s).unwrap(), f);
        assert!((f.value(0.01) - 0.01).abs() < 1e-6);
    }
}
