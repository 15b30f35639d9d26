//! Integrating-factor RK4 time stepping with CFL control and blow-up detection.
//!
//! The diagonal linear part `−ν|k|^γ − εk²` is propagated exactly; the transport
//! term (plus an optional forcing) goes through the classical four-stage rule in
//! the Lawson form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{CompiledModel, ModelSpec};
use crate::spectral::{derivative, lp_norm, tail_fraction, GridRef, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Running,
    Finished,
    BlowupDetected,
    ResolutionLost,
}

impl RunStatus {
    pub fn is_terminal(self) -> bool {
        self != RunStatus::Running
    }

    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Running => "running",
            RunStatus::Finished => "finished",
            RunStatus::BlowupDetected => "blowup-detected",
            RunStatus::ResolutionLost => "resolution-lost",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepperConfig {
    pub dt_max: f64,
    pub dt_min: f64,
    /// CFL safety factor in `(0, 1]`.
    pub safety: f64,
    /// When false every step uses `dt_max` regardless of the velocity.
    pub cfl: bool,
    /// Threshold on `‖θ_x‖_∞ + ‖u_x‖_∞`.
    pub blowup_threshold: f64,
    /// Threshold on the spectral tail fraction.
    pub tail_threshold: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt_max: 1e-2,
            dt_min: 1e-10,
            safety: 0.5,
            cfl: true,
            blowup_threshold: f64::INFINITY,
            tail_threshold: 1e-3,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt_min > 0.0 && self.dt_max >= self.dt_min && self.dt_max.is_finite()) {
            return bad(format!("need 0 < dt_min ≤ dt_max (got {}, {})", self.dt_min, self.dt_max));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("CFL safety must lie in (0, 1], got {}", self.safety));
        }
        if !(self.blowup_threshold > 0.0) || !(self.tail_threshold >= 0.0) {
            return bad("blow-up thresholds must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BlowupIndicator {
    pub theta_x_inf: f64,
    pub u_x_inf: f64,
    /// Running `∫ (‖θ_x‖_∞ + ‖u_x‖_∞) dt` accumulated by the stepper.
    pub integral: f64,
    pub tail_fraction: f64,
}

impl BlowupIndicator {
    pub fn sum(&self) -> f64 {
        self.theta_x_inf + self.u_x_inf
    }
}

/// Pointwise gradient sizes and the spectral tail of `θ`; the integral is left at 0.
pub fn blowup_indicator(theta: &SpectralField, spec: &ModelSpec) -> Result<BlowupIndicator> {
    let model = CompiledModel::new(spec, theta.grid())?;
    Ok(indicator_with(&model, theta))
}

fn indicator_with(model: &CompiledModel, theta: &SpectralField) -> BlowupIndicator {
    let u = model.velocity(theta);
    BlowupIndicator {
        theta_x_inf: lp_norm(&derivative(theta, 1), f64::INFINITY).unwrap_or(f64::NAN),
        u_x_inf: lp_norm(&derivative(&u, 1), f64::INFINITY).unwrap_or(f64::NAN),
        integral: 0.0,
        tail_fraction: tail_fraction(theta),
    }
}

/// `safety·Δx / max(‖u‖_∞, floor)`, capped at `dt_max`.
pub fn cfl_dt(theta: &SpectralField, spec: &ModelSpec, safety: f64, dt_max: f64) -> Result<f64> {
    let model = CompiledModel::new(spec, theta.grid())?;
    Ok(cfl_with(&model, theta, safety, dt_max))
}

const VELOCITY_FLOOR: f64 = 1e-12;

fn cfl_with(model: &CompiledModel, theta: &SpectralField, safety: f64, dt_max: f64) -> f64 {
    if model.spec().linear_only {
        return dt_max;
    }
    let u = model.velocity(theta);
    let umax = u.physical().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let dt = safety * theta.grid().dx() / umax.max(VELOCITY_FLOOR);
    if dt.is_nan() {
        0.0
    } else {
        dt.min(dt_max)
    }
}

#[derive(Debug, Clone)]
pub struct StepperState {
    pub t: f64,
    pub theta: SpectralField,
    pub dt: f64,
    pub step_count: u64,
    pub status: RunStatus,
    pub indicator: BlowupIndicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    /// The proposed `dt` exceeded the CFL bound; `state.dt` now holds the bound.
    Rejected,
    /// The state is terminal and was not advanced.
    Halted,
}

type Forcing = Box<dyn Fn(f64) -> Vec<Complex64> + Send + Sync>;

pub struct Stepper {
    model: CompiledModel,
    config: StepperConfig,
    forcing: Option<Forcing>,
    cached_dt: f64,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("spec", self.model.spec())
            .field("config", &self.config)
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl Stepper {
    pub fn new(spec: &ModelSpec, grid: &GridRef, config: StepperConfig) -> Result<Self> {
        config.validate()?;
        Ok(Stepper {
            model: CompiledModel::new(spec, grid)?,
            config,
            forcing: None,
            cached_dt: f64::NAN,
            e_full: Vec::new(),
            e_half: Vec::new(),
        })
    }

    /// Adds a source term given by its Fourier coefficients at time `t`.
    pub fn with_forcing(mut self, forcing: impl Fn(f64) -> Vec<Complex64> + Send + Sync + 'static) -> Self {
        self.forcing = Some(Box::new(forcing));
        self
    }

    pub fn model(&self) -> &CompiledModel {
        &self.model
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn initial_state(&self, theta: SpectralField, t: f64) -> Result<StepperState> {
        if !self.model.grid().same_as(theta.grid()) {
            return Err(Error::GridMismatch);
        }
        let mut theta = theta;
        theta.canonicalize();
        let indicator = indicator_with(&self.model, &theta);
        let status = if theta.is_finite() {
            RunStatus::Running
        } else {
            RunStatus::ResolutionLost
        };
        Ok(StepperState {
            t,
            theta,
            dt: self.config.dt_max,
            step_count: 0,
            status,
            indicator,
        })
    }

    /// Largest admissible step for the current state.
    pub fn admissible_dt(&self, theta: &SpectralField) -> f64 {
        if self.config.cfl {
            cfl_with(&self.model, theta, self.config.safety, self.config.dt_max)
        } else {
            self.config.dt_max
        }
    }

    fn refresh_exponentials(&mut self, dt: f64) {
        if dt.to_bits() == self.cached_dt.to_bits() {
            return;
        }
        let l = self.model.linear_symbol();
        self.e_full = l.iter().map(|&l| (l * dt).exp()).collect();
        self.e_half = l.iter().map(|&l| (0.5 * l * dt).exp()).collect();
        self.cached_dt = dt;
    }

    fn nonlinear(&self, v: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut out = self.model.transport_coeffs(v);
        if let Some(f) = &self.forcing {
            for (o, s) in out.iter_mut().zip(f(t)) {
                *o += s;
            }
        }
        out
    }

    /// Advances by `state.dt`, or rejects the step when `dt` breaks the CFL bound.
    pub fn step(&mut self, state: &mut StepperState) -> StepOutcome {
        if state.status.is_terminal() {
            return StepOutcome::Halted;
        }
        let bound = self.admissible_dt(&state.theta);
        if state.dt > bound * (1.0 + 1e-12) {
            state.dt = bound;
            if bound < self.config.dt_min {
                state.status = RunStatus::ResolutionLost;
                return StepOutcome::Halted;
            }
            return StepOutcome::Rejected;
        }
        let dt = state.dt;
        self.refresh_exponentials(dt);
        let grid = self.model.grid().clone();
        let u0 = state.theta.spectral().into_owned();
        let (e, e2) = (&self.e_full, &self.e_half);
        let h = 0.5 * dt;
        let t = state.t;

        let a = self.nonlinear(&u0, t);
        let u2: Vec<Complex64> = (0..u0.len()).map(|i| e2[i] * (u0[i] + a[i] * h)).collect();
        let b = self.nonlinear(&u2, t + h);
        let u3: Vec<Complex64> = (0..u0.len()).map(|i| e2[i] * u0[i] + b[i] * h).collect();
        let c = self.nonlinear(&u3, t + h);
        let u4: Vec<Complex64> = (0..u0.len()).map(|i| e[i] * u0[i] + e2[i] * c[i] * dt).collect();
        let d = self.nonlinear(&u4, t + dt);
        let next: Vec<Complex64> = (0..u0.len())
            .map(|i| e[i] * u0[i] + (e[i] * a[i] + e2[i] * (b[i] + c[i]) * 2.0 + d[i]) * (dt / 6.0))
            .collect();

        let mut theta = SpectralField::from_spectral(&grid, next).expect("grid length");
        theta.canonicalize();
        if !theta.is_finite() {
            state.status = RunStatus::ResolutionLost;
            return StepOutcome::Halted;
        }
        let mut indicator = indicator_with(&self.model, &theta);
        indicator.integral = state.indicator.integral + 0.5 * dt * (state.indicator.sum() + indicator.sum());
        state.theta = theta;
        state.t += dt;
        state.step_count += 1;
        state.indicator = indicator;
        if !indicator.sum().is_finite() {
            state.status = RunStatus::ResolutionLost;
        } else if indicator.sum() > self.config.blowup_threshold
            && indicator.tail_fraction > self.config.tail_threshold
        {
            state.status = RunStatus::BlowupDetected;
        }
        StepOutcome::Accepted
    }

    /// Steps until `t_target` is reached exactly or the run terminates, calling
    /// `on_accept` after every accepted step.
    pub fn advance_to(
        &mut self,
        state: &mut StepperState,
        t_target: f64,
        mut on_accept: impl FnMut(&StepperState),
    ) -> RunStatus {
        while state.status == RunStatus::Running && state.t < t_target {
            let remaining = t_target - state.t;
            let bound = self.admissible_dt(&state.theta);
            if bound < self.config.dt_min && bound < remaining {
                state.status = RunStatus::ResolutionLost;
                break;
            }
            let landing = bound >= remaining;
            state.dt = if landing { remaining } else { bound.min(remaining) };
            // Avoid leaving a sliver shorter than dt_min before the target.
            if !landing && remaining - state.dt < self.config.dt_min {
                state.dt = 0.5 * remaining;
            }
            match self.step(state) {
                StepOutcome::Accepted => {
                    if landing {
                        state.t = t_target;
                    }
                    on_accept(state);
                }
                StepOutcome::Rejected => continue,
                StepOutcome::Halted => break,
            }
        }
        state.status
    }

    /// [`Self::advance_to`] followed by marking the run finished if it survived.
    pub fn run_to(
        &mut self,
        state: &mut StepperState,
        t_end: f64,
        on_accept: impl FnMut(&StepperState),
    ) -> RunStatus {
        if self.advance_to(state, t_end, on_accept) == RunStatus::Running {
            state.status = RunStatus::Finished;
        }
        state.status
    }
}
