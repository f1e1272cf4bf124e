//! Pair interactions `h(t) = sum_i a_i exp(-b_i t^2)`.
//!
//! Finite Gaussian mixtures are even, real analytic and Schwartz, and every
//! term has a closed-form Fourier transform. With the unitary convention
//! `h_hat(t) = (2 pi)^{-1/2} \int e^{-its} h(s) ds` a single term transforms to
//! `a / sqrt(2b) * exp(-t^2 / (4b))`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: f64,
    /// Inverse squared length scale `b` in `exp(-b t^2)`.
    pub width: f64,
}

impl GaussianTerm {
    pub fn new(amplitude: f64, width: f64) -> Self {
        Self { amplitude, width }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (-self.width * t * t).exp()
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        -2.0 * self.width * t * self.value(t)
    }

    #[inline]
    pub fn second_derivative(&self, t: f64) -> f64 {
        let b = self.width;
        self.value(t) * (4.0 * b * b * t * t - 2.0 * b)
    }

    #[inline]
    pub fn fourier(&self, t: f64) -> f64 {
        let b = self.width;
        self.amplitude / (2.0 * b).sqrt() * (-t * t / (4.0 * b)).exp()
    }

    /// Standard deviation of the Gaussian profile, `1 / sqrt(2b)`.
    pub fn sigma(&self) -> f64 {
        1.0 / (2.0 * self.width).sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InteractionPotential {
    pub terms: Vec<GaussianTerm>,
}

impl InteractionPotential {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self {
            terms: vec![GaussianTerm::new(amplitude, width)],
        }
    }

    pub fn from_terms(terms: Vec<GaussianTerm>) -> Self {
        Self { terms }
    }

    pub fn validate(&self) -> Result<()> {
        for term in &self.terms {
            if !term.amplitude.is_finite() {
                return Err(invalid("interaction amplitude must be finite"));
            }
            if !(term.width.is_finite() && term.width > 0.0) {
                return Err(invalid("interaction width must be positive"));
            }
        }
        Ok(())
    }

    /// True when every amplitude vanishes (including the empty mixture).
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    /// Nonnegative amplitudes give a nonnegative transform.
    pub fn is_positive_semidefinite(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude >= 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| GaussianTerm::new(t.amplitude * factor, t.width))
                .collect(),
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.value(t)).sum()
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.derivative(t)).sum()
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.second_derivative(t)).sum()
    }

    pub fn fourier(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.fourier(t)).sum()
    }

    /// `sum_i |a_i|`, a uniform bound on `|h|`.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }

    pub fn sigma_max(&self) -> f64 {
        self.terms.iter().map(GaussianTerm::sigma).fold(0.0, f64::max)
    }

    /// `alpha^h = sup_t (-h''(t))`, evaluated on a grid covering twelve
    /// standard deviations of the widest term.
    pub fn curvature_bound(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let reach = 12.0 * self.sigma_max();
        let n = 8001;
        (0..n)
            .map(|i| -reach + 2.0 * reach * i as f64 / (n - 1) as f64)
            .map(|t| -self.second_derivative(t))
            .fold(0.0, f64::max)
    }

    /// Bound on `\int_{|t| > cutoff} |h_hat(t)| dt`.
    pub fn fourier_tail_mass(&self, cutoff: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.amplitude.abs()
                    * (2.0 * std::f64::consts::PI).sqrt()
                    * erfc(cutoff / (2.0 * t.width.sqrt()))
            })
            .sum()
    }

    pub fn descriptor(&self) -> String {
        if self.terms.is_empty() {
            return "zero".to_string();
        }
        self.terms
            .iter()
            .map(|t| format!("{}*exp(-{}t^2)", t.amplitude, t.width))
            .collect::<Vec<_>>()
            .join("+")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixture() -> InteractionPotential {
        InteractionPotential::from_terms(vec![
            GaussianTerm::new(0.3, 1.0),
            GaussianTerm::new(-0.1, 4.0),
        ])
    }

    #[test]
    fn values_and_bounds() {
        let h = mixture();
        assert!((h.value(0.0) - 0.2).abs() < 1e-15);
        for &t in &[0.0, 0.5, 3.0, 50.0] {
            assert!(h.value(t).abs() <= h.sup_bound());
        }
        assert!(h.value(50.0).abs() < 1e-300);
        assert!(!h.is_positive_semidefinite());
        assert!(InteractionPotential::gaussian(0.1, 1.0).is_positive_semidefinite());
    }

    #[test]
    fn fourier_matches_quadrature() {
        // direct trapezoid of (2 pi)^{-1/2} \int cos(ts) h(s) ds
        let h = mixture();
        let half = 12.0;
        let n = 24000;
        let ds = 2.0 * half / n as f64;
        for &t in &[0.0, 0.7, 2.5, 6.0] {
            let mut acc = 0.0;
            for i in 0..=n {
                let s = -half + i as f64 * ds;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * (t * s).cos() * h.value(s);
            }
            let numeric = acc * ds / (2.0 * std::f64::consts::PI).sqrt();
            assert!((numeric - h.fourier(t)).abs() < 1e-12, "t={t}: {numeric} vs {}", h.fourier(t));
        }
    }

    #[test]
    fn curvature_bound_single_term() {
        // -h'' peaks at t = 0 with value 2ab for a positive term.
        let h = InteractionPotential::gaussian(0.1, 1.0);
        assert!((h.curvature_bound() - 0.2).abs() < 1e-12);
        assert_eq!(InteractionPotential::zero().curvature_bound(), 0.0);
    }

    #[test]
    fn tail_mass_decays() {
        let h = InteractionPotential::gaussian(1.0, 1.0);
        assert!(h.fourier_tail_mass(0.0) > 2.0);
        assert!(h.fourier_tail_mass(12.0) < 1e-14);
    }

    #[test]
    fn rejects_bad_width() {
        assert!(InteractionPotential::gaussian(1.0, 0.0).validate().is_err());
        assert!(InteractionPotential::gaussian(f64::NAN, 1.0).validate().is_err());
    }
}
