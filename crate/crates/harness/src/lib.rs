//! Experiment harness: configuration, runs, sweeps, studies and operator checks.

pub mod config;
pub mod error;
pub mod inspect;
pub mod run;
pub mod sweep;
pub mod vanishing;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use run::{blowup_study, simulate, RunOutcome, RunSummary};

/// Process exit codes.
pub mod exit {
    pub const FINISHED: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const BLOWUP_DETECTED: i32 = 3;
    pub const RESOLUTION_LOST: i32 = 4;
    pub const VERIFY_FAILED: i32 = 5;

    pub fn for_status(status: nlt_core::RunStatus) -> i32 {
        match status {
            nlt_core::RunStatus::BlowupDetected => BLOWUP_DETECTED,
            nlt_core::RunStatus::ResolutionLost => RESOLUTION_LOST,
            _ => FINISHED,
        }
    }
}
