//! Experiment configuration, parsed from TOML and embedded verbatim in every
//! output header.

use std::path::{Path, PathBuf};

use nlt_core::integrator::StepperConfig;
use nlt_core::models::{InitialDataRecipe, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const SCHEMA: &str = "nlt-experiment/1";

fn default_schema() -> String {
    SCHEMA.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSpec,
    pub grid: GridConfig,
    pub initial: InitialDataRecipe,
    #[serde(default)]
    pub horizon: Horizon,
    #[serde(default)]
    pub stepping: SteppingConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
    #[serde(default)]
    pub vanishing_viscosity: Option<VanishingViscosityConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub period: f64,
}

/// Either a fixed end time or `"auto"`, which uses `c/‖θ_0‖` with `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Fixed(f64),
    Auto(AutoHorizon),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoHorizon {
    Auto,
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::Auto(AutoHorizon::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteppingConfig {
    pub safety: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub cfl: bool,
}

impl Default for SteppingConfig {
    fn default() -> Self {
        let d = StepperConfig::default();
        SteppingConfig {
            safety: d.safety,
            dt_max: d.dt_max,
            dt_min: d.dt_min,
            cfl: d.cfl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Absolute threshold on `‖θ_x‖_∞ + ‖u_x‖_∞`.
    pub blowup: Option<f64>,
    /// Threshold relative to the initial indicator; used when `blowup` is unset.
    pub blowup_factor: Option<f64>,
    pub tail_fraction: f64,
    /// Tolerance on the worst mass-budget residual reported in the summary.
    pub mass_budget: f64,
    pub energy_identity: f64,
    pub max_principle: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            blowup: None,
            blowup_factor: None,
            tail_fraction: 1e-3,
            mass_budget: 1e-6,
            energy_identity: 1e-8,
            max_principle: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; the `--out` flag and `NLT_OUT_DIR` take precedence.
    pub dir: Option<PathBuf>,
    /// Write every `record_stride`-th accepted step (the final step is always written).
    pub record_stride: u64,
    /// Also store snapshots at multiples of this time interval.
    pub sample_interval: Option<f64>,
    pub checkpoint: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            record_stride: 1,
            sample_interval: None,
            checkpoint: true,
        }
    }
}

/// Parameter lists whose cartesian product defines the sweep points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VanishingViscosityConfig {
    pub epsilons: Vec<f64>,
    pub sample_interval: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema != SCHEMA {
            return bad(format!("unsupported schema {:?}, expected {SCHEMA:?}", self.schema));
        }
        self.model.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.initial.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if !(self.grid.n >= 8 && self.grid.n.is_power_of_two()) {
            return bad(format!("grid.n must be a power of two ≥ 8, got {}", self.grid.n));
        }
        if !(self.grid.period > 0.0 && self.grid.period.is_finite()) {
            return bad(format!("grid.period must be positive, got {}", self.grid.period));
        }
        if let Horizon::Fixed(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("horizon must be positive, got {t}"));
            }
        }
        self.stepper_config(f64::INFINITY)
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.outputs.record_stride == 0 {
            return bad("outputs.record_stride must be at least 1".into());
        }
        if let Some(dt) = self.outputs.sample_interval {
            if !(dt > 0.0) {
                return bad("outputs.sample_interval must be positive".into());
            }
        }
        if let Some(f) = self.thresholds.blowup_factor {
            if !(f > 0.0) {
                return bad("thresholds.blowup_factor must be positive".into());
            }
        }
        if let Some(vv) = &self.vanishing_viscosity {
            if vv.epsilons.is_empty() || vv.epsilons.iter().any(|e| !(*e > 0.0)) {
                return bad("vanishing_viscosity.epsilons must be a nonempty list of positive values".into());
            }
            if vv.epsilons.windows(2).any(|w| w[1] > w[0]) {
                return bad("vanishing_viscosity.epsilons must be descending".into());
            }
            if !(vv.sample_interval > 0.0) {
                return bad("vanishing_viscosity.sample_interval must be positive".into());
            }
        }
        Ok(())
    }

    /// Stepper settings with the resolved absolute blow-up threshold.
    pub fn stepper_config(&self, blowup_threshold: f64) -> StepperConfig {
        StepperConfig {
            dt_max: self.stepping.dt_max,
            dt_min: self.stepping.dt_min,
            safety: self.stepping.safety,
            cfl: self.stepping.cfl,
            blowup_threshold,
            tail_threshold: self.thresholds.tail_fraction,
        }
    }
}
