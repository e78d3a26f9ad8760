//! File formats, parallel Monte Carlo harnesses and acceptance criteria on top of `clusterlp-core`.

pub mod criteria;
pub mod harness;
pub mod io;
pub mod sdpa;

pub use clusterlp_core as core;

/// Version stamped into every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const CAPACITY: i32 = 3;
    pub const CRITERION: i32 = 4;
}

/// A criterion or assertion that ran to completion and did not hold.
#[derive(Debug, thiserror::Error)]
#[error("criterion failed: {0}")]
pub struct CriterionFailed(pub String);

/// Maps an error chain to its exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<CriterionFailed>() {
            return exit::CRITERION;
        }
        if let Some(e) = cause.downcast_ref::<clusterlp_core::Error>() {
            return match e {
                clusterlp_core::Error::Capacity { .. } => exit::CAPACITY,
                clusterlp_core::Error::Solver { .. } => exit::INTERNAL,
                _ => exit::VALIDATION,
            };
        }
        if cause.is::<sdpa::SdpaError>() {
            return exit::VALIDATION;
        }
        if let Some(e) = cause.downcast_ref::<io::IoError>() {
            return match e {
                io::IoError::Io { .. } => exit::INTERNAL,
                _ => exit::VALIDATION,
            };
        }
    }
    exit::INTERNAL
}
