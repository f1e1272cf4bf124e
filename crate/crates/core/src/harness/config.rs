//! TOML experiment configuration.
//!
//! ```toml
//! output_dir = "runs/default"
//!
//! [ensemble]
//! n = 200
//! beta = 2.0
//! interaction = [{ amplitude = 0.5, width = 1.0 }]
//! field = { kind = "gaussian", coefficients = [1.0] }
//!
//! [chain]
//! sampler = "metropolis"
//! seeds = [1, 2]
//! samples_per_seed = 250
//! thin = 4000
//!
//! [reference]
//! beta = 2.0
//! ```
//!
//! Every section except `[ensemble]` has defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::equilibrium::{default_grid, SelfConsistentOptions, DEFAULT_CELLS};
use crate::error::{Error, Result};
use crate::model::ensemble::EnsembleSpec;
use crate::model::field::{ExternalField, FieldKind};
use crate::model::measure::Grid;
use crate::samplers::ChainSchedule;
use crate::statistics::{Bump, SmoothFunction, TestFunction};

pub const MANIFEST_VERSION: u32 = 1;

fn manifest_version() -> u32 {
    MANIFEST_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "manifest_version")]
    pub manifest_version: u32,
    /// Used when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceConfig>,
    #[serde(default)]
    pub statistics: StatisticsConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-width of the symmetric solver window; defaults to `3 sqrt(beta)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
}

impl GridConfig {
    pub fn grid(&self, beta: f64) -> Result<Grid> {
        let default = default_grid(beta);
        let half = self.half_width.unwrap_or(default.right);
        Grid::symmetric(half, self.n_cells.unwrap_or(DEFAULT_CELLS))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    /// Equilibrium measure of `Q` alone.
    Plain,
    /// Fixed point `mu = EqMeasure(Q + h_mu)`.
    #[default]
    SelfConsistent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub mode: SolveMode,
    /// Euler-Lagrange tolerance.
    #[serde(default = "default_el_tol")]
    pub tol: f64,
    /// Self-consistency L1 tolerance.
    #[serde(default = "default_sc_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_el_tol() -> f64 {
    1e-10
}
fn default_sc_tol() -> f64 {
    1e-6
}
fn default_damping() -> f64 {
    0.5
}
fn default_max_iterations() -> usize {
    200
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolveMode::default(),
            tol: default_el_tol(),
            fixed_point_tol: default_sc_tol(),
            damping: default_damping(),
            max_iterations: default_max_iterations(),
        }
    }
}

impl SolverConfig {
    pub fn self_consistent_options(&self) -> SelfConsistentOptions {
        SelfConsistentOptions {
            tol: self.fixed_point_tol,
            el_tol: self.tol,
            damping: self.damping,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Metropolis,
    Mala,
    Tridiagonal,
}

impl SamplerKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Metropolis => "metropolis",
            Self::Mala => "mala",
            Self::Tridiagonal => "tridiagonal",
        }
    }
}

/// Which law a sample file is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleTarget {
    /// `P^h` with field `Q` and pair interaction `h`.
    Modified,
    /// The comparison ensemble with field `V = Q + h_mu` and no pair term.
    Effective,
    /// The Gaussian beta-ensemble of the `[reference]` section.
    Reference,
}

impl SampleTarget {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Modified => "modified",
            Self::Effective => "effective",
            Self::Reference => "reference",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default = "default_sampler")]
    pub sampler: SamplerKind,
    /// Defaults to `modified`, plus `reference` when that section exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<SampleTarget>>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_samples_per_seed")]
    pub samples_per_seed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    /// Retained samples between persisted chain states.
    #[serde(default = "default_checkpoint")]
    pub checkpoint_every: usize,
}

fn default_sampler() -> SamplerKind {
    SamplerKind::Metropolis
}
fn default_seeds() -> Vec<u64> {
    vec![1, 2]
}
fn default_samples_per_seed() -> usize {
    250
}
fn default_checkpoint() -> usize {
    50
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            sampler: default_sampler(),
            targets: None,
            seeds: default_seeds(),
            samples_per_seed: default_samples_per_seed(),
            burn_in: None,
            thin: None,
            initial_step: None,
            checkpoint_every: default_checkpoint(),
        }
    }
}

impl ChainConfig {
    pub fn schedule(&self) -> ChainSchedule {
        ChainSchedule {
            n_samples: self.samples_per_seed,
            burn_in: self.burn_in,
            thin: self.thin,
            initial_step: self.initial_step,
            adapt: true,
        }
    }
}

/// The Gaussian beta-ensemble `Q = t^2`, `h = 0` used for comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "default_reference_sampler")]
    pub sampler: SamplerKind,
    #[serde(default = "default_reference_seeds")]
    pub seeds: Vec<u64>,
    /// Defaults to the modified ensemble's total sample count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_seed: Option<usize>,
    /// Marks a deliberately mismatched comparison that is expected to fail.
    #[serde(default)]
    pub negative_control: bool,
}

fn default_reference_sampler() -> SamplerKind {
    SamplerKind::Tridiagonal
}
fn default_reference_seeds() -> Vec<u64> {
    vec![1001]
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            n: None,
            beta: None,
            sampler: default_reference_sampler(),
            seeds: default_reference_seeds(),
            samples_per_seed: None,
            negative_control: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Density,
    Spacing,
    Correlation,
    Concentration,
    Dirichlet,
    ExpMoment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsConfig {
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Bulk point of the modified ensemble.
    #[serde(default)]
    pub center: f64,
    /// Bulk point of the reference ensemble.
    #[serde(default)]
    pub reference_center: f64,
    #[serde(default = "default_anchor_radius")]
    pub anchor_radius: f64,
    /// Radius of the offset bumps of the `k >= 2` test functions.
    #[serde(default = "default_offset_radius")]
    pub offset_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(default = "default_bins")]
    pub spacing_bins: usize,
    #[serde(default = "default_spacing_max")]
    pub spacing_max: f64,
    /// Spacing laws further apart than this fail the comparison.
    #[serde(default = "default_ks")]
    pub ks_threshold: f64,
    /// Correlation differences beyond this many combined errors fail.
    #[serde(default = "default_z")]
    pub z_threshold: f64,
    #[serde(default = "default_l1")]
    pub density_l1_tolerance: f64,
    #[serde(default = "default_linear")]
    pub linear_statistic: SmoothFunction,
    #[serde(default = "default_lambda")]
    pub exp_lambda: f64,
}

fn default_estimators() -> Vec<Estimator> {
    vec![
        Estimator::Density,
        Estimator::Spacing,
        Estimator::Correlation,
        Estimator::Concentration,
        Estimator::Dirichlet,
        Estimator::ExpMoment,
    ]
}
fn default_k() -> Vec<usize> {
    vec![1, 2]
}
fn default_xi() -> f64 {
    0.5
}
fn default_anchor_radius() -> f64 {
    1.0
}
fn default_offset_radius() -> f64 {
    2.0
}
fn default_bins() -> usize {
    40
}
fn default_spacing_max() -> f64 {
    4.0
}
fn default_ks() -> f64 {
    0.1
}
fn default_z() -> f64 {
    3.0
}
fn default_l1() -> f64 {
    0.05
}
fn default_linear() -> SmoothFunction {
    SmoothFunction::Cos { frequency: 1.0 }
}
fn default_lambda() -> f64 {
    1.0
}

impl Default for StatisticsConfig {
    fn default() -> Self {
        Self {
            estimators: default_estimators(),
            k: default_k(),
            xi: default_xi(),
            center: 0.0,
            reference_center: 0.0,
            anchor_radius: default_anchor_radius(),
            offset_radius: default_offset_radius(),
            bandwidth: None,
            spacing_bins: default_bins(),
            spacing_max: default_spacing_max(),
            ks_threshold: default_ks(),
            z_threshold: default_z(),
            density_l1_tolerance: default_l1(),
            linear_statistic: default_linear(),
            exp_lambda: default_lambda(),
        }
    }
}

impl StatisticsConfig {
    pub fn uses(&self, e: Estimator) -> bool {
        self.estimators.contains(&e)
    }

    /// `k`-point test function: unit-mass anchor, and for `k >= 2` unit-height
    /// offset bumps, all centered at zero.
    pub fn test_function(&self, k: usize) -> TestFunction {
        TestFunction {
            anchor: Bump::unit_mass(0.0, self.anchor_radius),
            offsets: vec![Bump::new(0.0, self.offset_radius, 1.0); k.saturating_sub(1)],
        }
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Default desk-scale profile.
    pub fn desk_scale() -> Self {
        let ensemble = EnsembleSpec::new(
            200,
            2.0,
            ExternalField::gaussian(),
            crate::model::interaction::InteractionPotential::gaussian(0.5, 1.0),
        )
        .expect("valid default ensemble");
        Self {
            manifest_version: MANIFEST_VERSION,
            output_dir: None,
            ensemble,
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            chain: ChainConfig {
                thin: Some(4000),
                ..ChainConfig::default()
            },
            reference: Some(ReferenceConfig::default()),
            statistics: StatisticsConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| config_error(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => config_error(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_error(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.manifest_version != MANIFEST_VERSION {
            return Err(config_error(format!(
                "manifest_version: expected {MANIFEST_VERSION}, found {}",
                self.manifest_version
            )));
        }
        self.ensemble
            .validate()
            .map_err(|e| config_error(format!("ensemble: {e}")))?;
        self.grid
            .grid(self.ensemble.beta)
            .map_err(|e| config_error(format!("grid: {e}")))?;
        let s = &self.solver;
        if !(s.tol > 0.0 && s.fixed_point_tol > 0.0) {
            return Err(config_error("solver: tolerances must be positive"));
        }
        if !(s.damping > 0.0 && s.damping <= 1.0) {
            return Err(config_error("solver.damping: must lie in (0, 1]"));
        }
        let c = &self.chain;
        if c.seeds.is_empty() {
            return Err(config_error("chain.seeds: at least one seed is required"));
        }
        if c.samples_per_seed == 0 {
            return Err(config_error("chain.samples_per_seed: must be positive"));
        }
        if c.checkpoint_every == 0 {
            return Err(config_error("chain.checkpoint_every: must be positive"));
        }
        if c.thin == Some(0) {
            return Err(config_error("chain.thin: must be positive"));
        }
        let targets = self.sample_targets();
        if c.sampler == SamplerKind::Tridiagonal
            && targets.iter().any(|t| *t != SampleTarget::Reference)
            && !is_gaussian(&self.ensemble)
        {
            return Err(config_error(
                "chain.sampler: tridiagonal draws need Q = t^2 and h = 0; use metropolis or mala",
            ));
        }
        if c.sampler == SamplerKind::Mala
            && self.ensemble.beta < 1.0
            && targets.iter().any(|t| *t != SampleTarget::Reference)
        {
            return Err(config_error("chain.sampler: mala needs beta >= 1; use metropolis"));
        }
        if targets.contains(&SampleTarget::Reference) && self.reference.is_none() {
            return Err(config_error("chain.targets: `reference` requires a [reference] section"));
        }
        if let Some(r) = &self.reference {
            if r.n == Some(0) || r.beta.is_some_and(|b| !(b > 0.0 && b.is_finite())) {
                return Err(config_error("reference: n and beta must be positive"));
            }
            if r.seeds.is_empty() || r.samples_per_seed == Some(0) {
                return Err(config_error("reference: seeds and samples_per_seed must be nonempty"));
            }
        }
        let st = &self.statistics;
        if st.k.iter().any(|k| !(1..=3).contains(k)) {
            return Err(config_error("statistics.k: entries must be 1, 2 or 3"));
        }
        if !(st.xi > 0.0 && st.xi <= 0.5) {
            return Err(config_error("statistics.xi: must lie in (0, 1/2]"));
        }
        if !(st.anchor_radius > 0.0 && st.offset_radius > 0.0) {
            return Err(config_error("statistics: bump radii must be positive"));
        }
        if st.spacing_bins == 0 || !(st.spacing_max > 0.0) {
            return Err(config_error("statistics: spacing histogram needs bins and a positive range"));
        }
        Ok(())
    }

    /// Replaces the seeds by `seed, seed + 1, ...` (reference: `seed + 1000 + i`).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.chain.seeds = (0..self.chain.seeds.len() as u64).map(|i| seed + i).collect();
        if let Some(r) = &mut self.reference {
            r.seeds = (0..r.seeds.len() as u64).map(|i| seed + 1000 + i).collect();
        }
        self
    }

    pub fn sample_targets(&self) -> Vec<SampleTarget> {
        match &self.chain.targets {
            Some(t) => t.clone(),
            None if self.reference.is_some() => vec![SampleTarget::Modified, SampleTarget::Reference],
            None => vec![SampleTarget::Modified],
        }
    }

    /// The Gaussian comparison ensemble.
    pub fn reference_spec(&self) -> Option<EnsembleSpec> {
        self.reference.as_ref().map(|r| EnsembleSpec {
            n: r.n.unwrap_or(self.ensemble.n),
            beta: r.beta.unwrap_or(self.ensemble.beta),
            field: ExternalField::gaussian(),
            interaction: Default::default(),
        })
    }

    pub fn reference_samples_per_seed(&self) -> usize {
        let total = self.chain.samples_per_seed * self.chain.seeds.len();
        self.reference
            .as_ref()
            .and_then(|r| r.samples_per_seed)
            .unwrap_or_else(|| total.div_ceil(self.reference.as_ref().map_or(1, |r| r.seeds.len())))
    }
}

/// `Q = t^2` exactly and no pair interaction.
pub fn is_gaussian(spec: &EnsembleSpec) -> bool {
    spec.field.kind == FieldKind::Gaussian && spec.field.coefficients == [1.0] && spec.interaction.is_zero()
}
