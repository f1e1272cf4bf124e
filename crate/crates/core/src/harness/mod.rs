//! Reproducible experiment runs driven by a TOML configuration.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{
    cmd_compare, cmd_eqsolve, cmd_sample, cmd_stats, load_measure, load_target, CompareReport, SampleOptions,
    SampleSummary, SolveSummary, StatRow,
};
pub use config::{ExperimentConfig, SampleTarget, SamplerKind, SolveMode};
pub use manifest::{sha256_file, short_hash, Artifact, Manifest};

use crate::error::Error;

/// Process exit code for an error raised by a command.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::NonConvergence { .. }
        | Error::WindowTooSmall { .. }
        | Error::NonContraction { .. }
        | Error::NotNormalized(_)
        | Error::StepSizeCollapse => 2,
        Error::MissingArtifact(_) => 3,
        Error::Incompatible(_) => 4,
        _ => 1,
    }
}

/// Exit code of a comparison whose verdict is FAIL.
pub const EXIT_CHECKS_FAILED: i32 = 5;
