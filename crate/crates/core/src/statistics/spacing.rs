use log::warn;
use serde::{Deserialize, Serialize};

/// Below this many gaps a histogram is flagged as noisy.
pub const MIN_GAPS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingHistogram {
    /// `bins + 1` edges on `[0, max_gap]`.
    pub edges: Vec<f64>,
    /// Fraction of gaps per bin; gaps beyond the last edge fall in the last bin.
    pub mass: Vec<f64>,
    /// `mass / bin width`.
    pub density: Vec<f64>,
    /// Sorted gaps, the support of the empirical CDF.
    pub sorted_gaps: Vec<f64>,
}

impl SpacingHistogram {
    pub fn ecdf(&self, s: f64) -> f64 {
        ecdf(&self.sorted_gaps, s)
    }

    /// Mass of the bins whose right edge is at most `s`.
    pub fn mass_below(&self, s: f64) -> f64 {
        self.edges[1..]
            .iter()
            .zip(&self.mass)
            .take_while(|(e, _)| **e <= s + 1e-12)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Normalized histogram of gaps on `[0, max_gap]` with `bins` bins.
pub fn spacing_histogram(gaps: &[f64], bins: usize, max_gap: f64) -> SpacingHistogram {
    if gaps.len() < MIN_GAPS {
        warn!("spacing histogram from {} gaps (< {MIN_GAPS})", gaps.len());
    }
    let bins = bins.max(1);
    let width = max_gap / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &g in gaps {
        let b = ((g / width).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = gaps.len().max(1) as f64;
    let mass: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let density = mass.iter().map(|m| m / width).collect();
    let mut sorted_gaps = gaps.to_vec();
    sorted_gaps.sort_by(f64::total_cmp);
    SpacingHistogram {
        edges,
        mass,
        density,
        sorted_gaps,
    }
}

/// Empirical CDF of sorted values.
pub fn ecdf(sorted: &[f64], s: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.partition_point(|v| *v <= s) as f64 / sorted.len() as f64
}

/// Kolmogorov-Smirnov distance between two samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_against(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Nearest-neighbor spacing CDF of a Poisson process with unit density.
pub fn poisson_spacing_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-s).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_gaps(count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = count + 1;
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * n as f64).collect();
        x.sort_by(f64::total_cmp);
        x.windows(2).map(|w| w[1] - w[0]).collect()
    }

    #[test]
    fn iid_points_have_exponential_gaps() {
        let gaps = uniform_gaps(10_000, 3);
        assert!(ks_against(&gaps, poisson_spacing_cdf) <= 0.03);
        let h = spacing_histogram(&gaps, 40, 4.0);
        assert!((h.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // P(s <= 0.1) = 1 - e^{-0.1}
        assert!((h.mass_below(0.1) - (1.0 - (-0.1f64).exp())).abs() < 0.01);
    }

    #[test]
    fn two_sample_distance_basics() {
        let a = [0.1, 0.2, 0.3];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &[1.0, 2.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[2.5, 3.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ecdf_steps() {
        let s = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(ecdf(&s, 0.5), 0.0);
        assert_eq!(ecdf(&s, 2.0), 0.75);
        assert_eq!(ecdf(&s, 3.0), 1.0);
    }
}
