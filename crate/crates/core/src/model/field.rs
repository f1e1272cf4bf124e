//! Confining one-body potentials.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Number of grid points used when bounding second derivatives over `[-L, L]`.
pub const CURVATURE_GRID: usize = 4001;

/// Anything that can act as the one-body potential of an ensemble.
///
/// Implemented by [`ExternalField`] and by the tabulated effective fields
/// `Q + h_mu` built in the equilibrium module.
pub trait OneBody: Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// `c t^2`, coefficients `[c]` (defaults to `t^2`).
    Gaussian,
    /// `c_1 t^2 + c_2 t^4 + ...`, coefficients `[c_1, c_2, ...]`.
    EvenPolynomial,
    /// `c t^2 + A exp(-t^2 / w^2)`, coefficients `[c, A, w]`.
    GaussianPlusBump,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalField {
    pub kind: FieldKind,
    #[serde(default)]
    pub coefficients: Vec<f64>,
    /// Half-width of the window on which convexity and growth are checked.
    #[serde(default = "default_domain_bound")]
    pub domain_bound: f64,
}

fn default_domain_bound() -> f64 {
    4.0
}

impl ExternalField {
    /// The Gaussian potential `G(t) = t^2`.
    pub fn gaussian() -> Self {
        Self {
            kind: FieldKind::Gaussian,
            coefficients: vec![1.0],
            domain_bound: default_domain_bound(),
        }
    }

    pub fn quadratic(c: f64) -> Self {
        Self {
            kind: FieldKind::Gaussian,
            coefficients: vec![c],
            domain_bound: default_domain_bound(),
        }
    }

    pub fn even_polynomial(coefficients: Vec<f64>) -> Self {
        Self {
            kind: FieldKind::EvenPolynomial,
            coefficients,
            domain_bound: default_domain_bound(),
        }
    }

    pub fn gaussian_plus_bump(c: f64, amplitude: f64, width: f64) -> Self {
        Self {
            kind: FieldKind::GaussianPlusBump,
            coefficients: vec![c, amplitude, width],
            domain_bound: default_domain_bound(),
        }
    }

    pub fn with_domain_bound(mut self, bound: f64) -> Self {
        self.domain_bound = bound;
        self
    }

    /// Multiplies the whole field by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        match self.kind {
            FieldKind::Gaussian | FieldKind::EvenPolynomial => {
                if out.coefficients.is_empty() {
                    out.coefficients.push(1.0);
                }
                out.coefficients.iter_mut().for_each(|c| *c *= factor);
            }
            FieldKind::GaussianPlusBump => {
                out.coefficients[0] *= factor;
                out.coefficients[1] *= factor;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.domain_bound.is_finite() && self.domain_bound > 0.0) {
            return Err(invalid("field domain_bound must be positive"));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("field coefficients must be finite"));
        }
        match self.kind {
            FieldKind::Gaussian if self.coefficients.len() > 1 => {
                Err(invalid("gaussian field takes at most one coefficient"))
            }
            FieldKind::EvenPolynomial if self.coefficients.is_empty() => {
                Err(invalid("even-polynomial field needs at least one coefficient"))
            }
            FieldKind::GaussianPlusBump if self.coefficients.len() != 3 => {
                Err(invalid("gaussian-plus-bump field takes coefficients [c, A, w]"))
            }
            FieldKind::GaussianPlusBump if self.coefficients[2] <= 0.0 => {
                Err(invalid("bump width must be positive"))
            }
            _ => Ok(()),
        }
    }

    fn quadratic_coefficient(&self) -> f64 {
        self.coefficients.first().copied().unwrap_or(1.0)
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        match self.kind {
            FieldKind::Gaussian => 2.0 * self.quadratic_coefficient(),
            FieldKind::EvenPolynomial => self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let p = 2 * (i as i32 + 1);
                    c * (p * (p - 1)) as f64 * t.powi(p - 2)
                })
                .sum(),
            FieldKind::GaussianPlusBump => {
                let (c, a, w) = self.bump_parts();
                let w2 = w * w;
                let e = (-t * t / w2).exp();
                2.0 * c + a * e * (4.0 * t * t / (w2 * w2) - 2.0 / w2)
            }
        }
    }

    fn bump_parts(&self) -> (f64, f64, f64) {
        (self.coefficients[0], self.coefficients[1], self.coefficients[2])
    }

    /// `alpha_Q`: the smallest second derivative on a uniform grid of `[-L, L]`.
    pub fn alpha_q(&self) -> f64 {
        let l = self.domain_bound;
        (0..CURVATURE_GRID)
            .map(|i| -l + 2.0 * l * i as f64 / (CURVATURE_GRID - 1) as f64)
            .map(|t| self.second_derivative(t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_strongly_convex(&self) -> bool {
        self.alpha_q() > 0.0
    }

    /// Concrete proxy for logarithmic growth at infinity: `Q(L) > beta log L`.
    pub fn grows_faster_than_log(&self, beta: f64) -> bool {
        let l = self.domain_bound;
        self.value(l) > beta * l.ln()
    }

    /// Short human-readable descriptor, used in file headers.
    pub fn descriptor(&self) -> String {
        let kind = match self.kind {
            FieldKind::Gaussian => "gaussian",
            FieldKind::EvenPolynomial => "even-polynomial",
            FieldKind::GaussianPlusBump => "gaussian-plus-bump",
        };
        format!("{kind}{:?}", self.coefficients)
    }
}

impl OneBody for ExternalField {
    fn value(&self, t: f64) -> f64 {
        match self.kind {
            FieldKind::Gaussian => self.quadratic_coefficient() * t * t,
            FieldKind::EvenPolynomial => {
                let t2 = t * t;
                // Horner in t^2
                self.coefficients.iter().rev().fold(0.0, |acc, c| (acc + c) * t2)
            }
            FieldKind::GaussianPlusBump => {
                let (c, a, w) = self.bump_parts();
                c * t * t + a * (-t * t / (w * w)).exp()
            }
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match self.kind {
            FieldKind::Gaussian => 2.0 * self.quadratic_coefficient() * t,
            FieldKind::EvenPolynomial => self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let p = 2 * (i as i32 + 1);
                    c * p as f64 * t.powi(p - 1)
                })
                .sum(),
            FieldKind::GaussianPlusBump => {
                let (c, a, w) = self.bump_parts();
                let w2 = w * w;
                2.0 * c * t - 2.0 * a * t / w2 * (-t * t / w2).exp()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fields() -> Vec<ExternalField> {
        vec![
            ExternalField::gaussian(),
            ExternalField::even_polynomial(vec![0.5, 0.1, 0.01]),
            ExternalField::gaussian_plus_bump(1.0, 0.2, 0.7),
        ]
    }

    #[test]
    fn gaussian_values() {
        let g = ExternalField::gaussian();
        assert_eq!(g.value(1.5), 2.25);
        assert_eq!(g.derivative(0.5), 1.0);
        assert_eq!(g.alpha_q(), 2.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let step = 1e-5;
        for f in fields() {
            for &t in &[-1.3, -0.2, 0.0, 0.4, 2.1] {
                let fd = (f.value(t + step) - f.value(t - step)) / (2.0 * step);
                assert!((fd - f.derivative(t)).abs() < 1e-6 * (1.0 + fd.abs()), "{f:?} at {t}");
                let fd2 = (f.derivative(t + step) - f.derivative(t - step)) / (2.0 * step);
                assert!((fd2 - f.second_derivative(t)).abs() < 1e-5 * (1.0 + fd2.abs()));
            }
        }
    }

    #[test]
    fn convexity_and_growth() {
        for f in fields() {
            assert!(f.is_strongly_convex(), "{f:?}");
            assert!(f.grows_faster_than_log(2.0));
        }
        // A deep bump destroys convexity near the origin.
        let bad = ExternalField::gaussian_plus_bump(1.0, 3.0, 0.5);
        assert!(!bad.is_strongly_convex());
    }

    #[test]
    fn validation_rejects_malformed() {
        assert!(ExternalField::even_polynomial(vec![]).validate().is_err());
        let mut f = ExternalField::gaussian_plus_bump(1.0, 0.1, 0.0);
        assert!(f.validate().is_err());
        f.coefficients = vec![1.0];
        assert!(f.validate().is_err());
        assert!(ExternalField::gaussian().with_domain_bound(-1.0).validate().is_err());
    }

    #[test]
    fn scaling_scales_values() {
        for f in fields() {
            let g = f.scaled(0.25);
            for &t in &[-0.7, 0.3, 1.9] {
                assert!((g.value(t) - 0.25 * f.value(t)).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn fields_are_even(t in -5.0f64..5.0) {
            for f in fields() {
                prop_assert_eq!(f.value(t), f.value(-t));
                prop_assert!((f.derivative(t) + f.derivative(-t)).abs() <= 1e-12 * (1.0 + f.derivative(t).abs()));
            }
        }
    }
}
