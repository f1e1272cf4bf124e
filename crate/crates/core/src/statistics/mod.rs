//! Estimators over sample sets: one-point densities, unfolded spacings,
//! averaged correlation integrals, reweighting diagnostics and linear
//! statistics.

pub mod concentration;
pub mod correlation;
pub mod density;
pub mod importance;
pub mod plot;
pub mod spacing;
pub mod unfold;

pub use concentration::{
    centered_linear_statistic, concentration_check, ConcentrationReport, ConcentrationRow, Moments, SmoothFunction,
};
pub use correlation::{
    averaged_correlation, correlation_values, poisson_reference, sine_kernel_pair, sine_kernel_reference,
    window_half_width, Bump, CorrelationEstimate, TestFunction,
};
pub use density::{default_bandwidth, empirical_density};
pub use importance::{
    effective_sample_size, estimate_dirichlet, exp_moment_diagnostic, DirichletEstimate, ExpMomentEstimate,
    GradientMode,
};
pub use spacing::{ecdf, ks_against, ks_two_sample, poisson_spacing_cdf, spacing_histogram, SpacingHistogram};
pub use unfold::{bulk_gaps, bulk_window, unfold, CdfTable, SpacingSample, Unfolder, BULK_FRACTION};
