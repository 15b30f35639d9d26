//! Single runs: stepping, diagnostics, NDJSON records, final checkpoint, summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nlt_core::diagnostics::{Diagnostics, ResidualSummary, RunRecord};
use nlt_core::integrator::{blowup_indicator, BlowupIndicator, RunStatus, Stepper};
use nlt_core::models::{classify_regime, local_horizon_estimate, RegimeReport};
use nlt_core::spectral::{make_grid, SpectralField};
use nlt_core::Checkpoint;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Horizon, SCHEMA};
use crate::error::{HarnessError, Result};

pub const RECORDS_FILE: &str = "records.ndjson";
pub const CHECKPOINT_FILE: &str = "final.nlt";
pub const SUMMARY_FILE: &str = "summary.json";

/// Default relative blow-up threshold for the blow-up preset.
pub const BLOWUP_PRESET_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header<'a> {
    pub schema: &'a str,
    pub version: &'a str,
    pub config: &'a ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: Option<String>,
    pub status: RunStatus,
    pub t_final: f64,
    pub horizon: f64,
    pub horizon_auto: bool,
    pub steps: u64,
    pub regime: RegimeReport,
    pub blowup_threshold: f64,
    pub initial_indicator: BlowupIndicator,
    pub final_indicator: BlowupIndicator,
    /// Largest `‖θ_x‖_∞ / ‖θ_x(0)‖_∞` over the accepted steps.
    pub gradient_growth: f64,
    /// Largest tail fraction over the accepted steps.
    pub peak_tail_fraction: f64,
    pub residuals: ResidualSummary,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    /// The records that were written (every `record_stride`-th step plus the last).
    pub records: Vec<RunRecord>,
    /// Snapshots at multiples of `outputs.sample_interval`, starting with `θ_0`.
    pub samples: Vec<(f64, SpectralField)>,
    pub final_theta: SpectralField,
}

impl RunOutcome {
    pub fn status(&self) -> RunStatus {
        self.summary.status
    }
}

/// Resolves `"auto"` to `c/‖θ_0‖` with `c = 1`.
pub fn resolve_horizon(cfg: &ExperimentConfig, theta0: &SpectralField) -> Result<(f64, bool)> {
    match cfg.horizon {
        Horizon::Fixed(t) => Ok((t, false)),
        Horizon::Auto(_) => Ok((local_horizon_estimate(theta0, &cfg.model, 1.0)?, true)),
    }
}

struct RecordSink {
    writer: Option<BufWriter<File>>,
    path: PathBuf,
}

impl RecordSink {
    fn write(&mut self, record: &RunRecord) -> Result<()> {
        if let Some(w) = &mut self.writer {
            serde_json::to_writer(&mut *w, record)?;
            w.write_all(b"\n").map_err(|e| HarnessError::io(&self.path, e))?;
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        if let Some(mut w) = self.writer {
            w.flush().map_err(|e| HarnessError::io(&self.path, e))?;
        }
        Ok(())
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Runs one configuration. With `out = Some(dir)` the records, final checkpoint and
/// summary are written there; nothing is created if the config is invalid.
pub fn simulate(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate()?;
    let grid = make_grid(cfg.grid.n, cfg.grid.period).map_err(|e| HarnessError::Config(e.to_string()))?;
    let theta0 = cfg.initial.build(&grid).map_err(|e| HarnessError::Config(e.to_string()))?;
    let (horizon, horizon_auto) = resolve_horizon(cfg, &theta0)?;
    if horizon_auto {
        eprintln!("horizon auto: c/|theta0| with c = 1 gives T = {horizon:.6e}");
    }
    let initial_indicator = blowup_indicator(&theta0, &cfg.model)?;
    let blowup_threshold = match (cfg.thresholds.blowup, cfg.thresholds.blowup_factor) {
        (Some(abs), _) => abs,
        (None, Some(f)) => f * initial_indicator.sum(),
        (None, None) => f64::INFINITY,
    };
    let mut stepper = Stepper::new(&cfg.model, &grid, cfg.stepper_config(blowup_threshold))
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut state = stepper.initial_state(theta0.clone(), 0.0)?;
    let mut diag = Diagnostics::new(&cfg.model, &theta0)?;

    let mut sink = match out {
        Some(dir) => {
            create_dir(dir)?;
            let path = dir.join(RECORDS_FILE);
            let file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
            let mut w = BufWriter::new(file);
            let header = Header {
                schema: SCHEMA,
                version: env!("CARGO_PKG_VERSION"),
                config: cfg,
            };
            serde_json::to_writer(&mut w, &serde_json::json!({ "header": header }))?;
            w.write_all(b"\n").map_err(|e| HarnessError::io(&path, e))?;
            RecordSink { writer: Some(w), path }
        }
        None => RecordSink {
            writer: None,
            path: PathBuf::new(),
        },
    };

    let stride = cfg.outputs.record_stride;
    let mut records = Vec::new();
    // The newest record is held back so the last one can carry the terminal status.
    let mut pending: Option<(RunRecord, bool)> = None;
    let mut failure: Option<HarnessError> = None;
    let theta_x0 = initial_indicator.theta_x_inf;
    let mut gradient_growth: f64 = 1.0;
    let mut peak_tail = initial_indicator.tail_fraction;

    let mut observe = |s: &nlt_core::StepperState,
                       records: &mut Vec<RunRecord>,
                       sink: &mut RecordSink,
                       pending: &mut Option<(RunRecord, bool)>|
     -> Result<()> {
        let record = diag.observe(s)?;
        if let Some((prev, keep)) = pending.take() {
            if keep {
                sink.write(&prev)?;
                records.push(prev);
            }
        }
        *pending = Some((record, s.step_count.is_multiple_of(stride)));
        Ok(())
    };

    observe(&state, &mut records, &mut sink, &mut pending)?;

    let mut targets = Vec::new();
    if let Some(dt) = cfg.outputs.sample_interval {
        let count = (horizon / dt * (1.0 + 1e-12)).floor() as u64;
        targets.extend((1..=count).map(|i| i as f64 * dt).filter(|&t| t < horizon * (1.0 - 1e-12)));
    }
    targets.push(horizon);
    let mut samples = Vec::new();
    if cfg.outputs.sample_interval.is_some() {
        samples.push((0.0, theta0.clone()));
    }

    for &target in &targets {
        stepper.advance_to(&mut state, target, |s| {
            if failure.is_some() {
                return;
            }
            gradient_growth = gradient_growth.max(s.indicator.theta_x_inf / theta_x0);
            peak_tail = peak_tail.max(s.indicator.tail_fraction);
            if let Err(e) = observe(s, &mut records, &mut sink, &mut pending) {
                failure = Some(e);
            }
        });
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if state.status != RunStatus::Running {
            break;
        }
        if cfg.outputs.sample_interval.is_some() {
            samples.push((state.t, state.theta.clone()));
        }
    }
    if state.status == RunStatus::Running {
        state.status = RunStatus::Finished;
    }
    if let Some((mut last, _)) = pending.take() {
        last.status = state.status;
        sink.write(&last)?;
        records.push(last);
    }
    sink.finish()?;

    let summary = RunSummary {
        name: cfg.name.clone(),
        status: state.status,
        t_final: state.t,
        horizon,
        horizon_auto,
        steps: state.step_count,
        regime: classify_regime(&cfg.model),
        blowup_threshold,
        initial_indicator,
        final_indicator: state.indicator,
        gradient_growth: if theta_x0 > 0.0 { gradient_growth } else { 0.0 },
        peak_tail_fraction: peak_tail,
        residuals: diag.summary().clone(),
    };

    if let Some(dir) = out {
        if cfg.outputs.checkpoint {
            let path = dir.join(CHECKPOINT_FILE);
            Checkpoint::from_field(&state.theta, state.t).write_file(&path)?;
        }
        write_json(&dir.join(SUMMARY_FILE), &summary)?;
    }

    Ok(RunOutcome {
        summary,
        records,
        samples,
        final_theta: state.theta,
    })
}

/// The blow-up preset: a relative threshold of 100× the initial indicator unless
/// the config sets one.
pub fn blowup_study(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutcome> {
    let mut cfg = cfg.clone();
    if cfg.thresholds.blowup.is_none() && cfg.thresholds.blowup_factor.is_none() {
        cfg.thresholds.blowup_factor = Some(BLOWUP_PRESET_FACTOR);
    }
    simulate(&cfg, out)
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}
