use serde::{Deserialize, Serialize};

use super::field::ExternalField;
use super::interaction::InteractionPotential;
use crate::error::{invalid, Result};

/// Full definition of the ensemble with density proportional to
/// `prod_{i<j} |x_i - x_j|^beta exp(-N sum Q(x_j) - sum_{i<j} h(x_i - x_j))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub beta: f64,
    pub field: ExternalField,
    #[serde(default)]
    pub interaction: InteractionPotential,
}

/// Recorded curvature data for the pair `(Q, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub alpha_q: f64,
    pub alpha_h: f64,
    pub positive_semidefinite: bool,
    /// `alpha_q > alpha_h`.
    pub admissible: bool,
    /// The comparison certifies the regime only for positive semi-definite `h`;
    /// otherwise `admissible` is advisory.
    pub certified: bool,
}

impl EnsembleSpec {
    pub fn new(
        n: usize,
        beta: f64,
        field: ExternalField,
        interaction: InteractionPotential,
    ) -> Result<Self> {
        let spec = Self {
            n,
            beta,
            field,
            interaction,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The Gaussian beta-ensemble with `Q(t) = t^2` and no extra interaction.
    pub fn gaussian(n: usize, beta: f64) -> Result<Self> {
        Self::new(n, beta, ExternalField::gaussian(), InteractionPotential::zero())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(invalid("beta must be positive"));
        }
        self.field.validate()?;
        self.interaction.validate()
    }

    pub fn admissibility(&self) -> Admissibility {
        let alpha_q = self.field.alpha_q();
        let alpha_h = self.interaction.curvature_bound();
        let positive_semidefinite = self.interaction.is_positive_semidefinite();
        let admissible = alpha_q > alpha_h;
        Admissibility {
            alpha_q,
            alpha_h,
            positive_semidefinite,
            admissible,
            certified: admissible && positive_semidefinite,
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }
}

/// One particle state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_cache: Option<f64>,
}

impl Configuration {
    pub fn new(positions: Vec<f64>) -> Self {
        Self {
            positions,
            energy_cache: None,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn sorted(mut self) -> Self {
        self.positions.sort_by(f64::total_cmp);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.iter().any(|x| !x.is_finite()) {
            return Err(invalid("configuration contains non-finite positions"));
        }
        Ok(())
    }
}

impl From<Vec<f64>> for Configuration {
    fn from(positions: Vec<f64>) -> Self {
        Self::new(positions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_flag() {
        let weak = EnsembleSpec::new(
            10,
            2.0,
            ExternalField::gaussian(),
            InteractionPotential::gaussian(0.1, 1.0),
        )
        .unwrap();
        let a = weak.admissibility();
        assert_eq!(a.alpha_q, 2.0);
        assert!((a.alpha_h - 0.2).abs() < 1e-12);
        assert!(a.admissible && a.certified);

        let strong = EnsembleSpec::new(
            10,
            2.0,
            ExternalField::gaussian(),
            InteractionPotential::gaussian(2.0, 1.0),
        )
        .unwrap();
        assert!(!strong.admissibility().admissible);

        let signed = EnsembleSpec::new(
            10,
            2.0,
            ExternalField::gaussian(),
            InteractionPotential::gaussian(-0.1, 1.0),
        )
        .unwrap();
        let a = signed.admissibility();
        assert!(a.admissible && !a.certified);
    }

    #[test]
    fn rejects_invalid() {
        assert!(EnsembleSpec::gaussian(0, 2.0).is_err());
        assert!(EnsembleSpec::gaussian(3, 0.0).is_err());
        assert!(EnsembleSpec::gaussian(3, -1.0).is_err());
        assert!(Configuration::new(vec![0.0, f64::NAN]).validate().is_err());
    }
}
