//! Pseudo-spectral numerics for one-dimensional transport equations driven by
//! nonlocal velocities `θ_t + u θ_x + ν Λ^γ θ = ε θ_xx` on a periodic interval.

pub mod checkpoint;
pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod littlewood_paley;
pub mod models;
pub mod nonlocal;
pub mod quadrature;
pub mod spectral;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use diagnostics::{Diagnostics, ResidualSummary, RunRecord};
pub use error::{Error, Result};
pub use integrator::{RunStatus, Stepper, StepperConfig, StepperState};
pub use littlewood_paley::DyadicPartition;
pub use models::{classify_regime, InitialData, InitialDataRecipe, ModelFamily, ModelSpec};
pub use spectral::{make_grid, Grid, GridRef, SpectralField};
