//! Per-step norms and invariant residuals, plus the trajectory-level checks
//! (weak-form functional, Besov doubling horizon, H² growth envelope).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{BlowupIndicator, RunStatus, StepperState};
use crate::littlewood_paley::{half_commutator, DyadicPartition};
use crate::models::{CompiledModel, ModelSpec};
use crate::nonlocal::{hilbert, lambda_pow};
use crate::quadrature::{simpson, CumulativeSimpson};
use crate::spectral::{dealiased_product, derivative, inner_product, lp_norm, sobolev_norm, GridRef, SpectralField};

pub const NORM_L1: &str = "l1";
pub const NORM_L2: &str = "l2";
pub const NORM_LINF: &str = "linf";
pub const NORM_H_HALF: &str = "h_half";
pub const NORM_H_GAMMA_HALF: &str = "h_gamma_half";
pub const NORM_H2: &str = "h2";
pub const NORM_BESOV: &str = "besov_3_2_2_1";

pub const RES_MASS: &str = "mass_budget";
pub const RES_ENERGY: &str = "energy_identity";
pub const RES_MAX_PRINCIPLE: &str = "max_principle_increment";
pub const RES_POSITIVITY: &str = "positivity_floor";

/// One line of the time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub t: f64,
    pub dt: f64,
    pub step: u64,
    pub status: RunStatus,
    pub mean: f64,
    pub min: f64,
    pub norms: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    /// Set once `θ` dips below `−tol·‖θ‖_∞`, after which the mass identity no
    /// longer applies.
    pub negative: bool,
    pub blowup: BlowupIndicator,
}

impl RunRecord {
    pub fn norm(&self, key: &str) -> f64 {
        self.norms.get(key).copied().unwrap_or(f64::NAN)
    }

    pub fn residual(&self, key: &str) -> f64 {
        self.residuals.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// Worst values seen over a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    /// Largest signed relative mass residual.
    pub mass_budget_max: f64,
    /// Largest relative mass residual in absolute value.
    pub mass_budget_abs: f64,
    pub energy_identity_abs: f64,
    /// Largest single-step increase of `‖θ‖_∞`, relative to `‖θ_0‖_∞`.
    pub max_principle_increment: f64,
    /// Smallest `min θ / ‖θ_0‖_∞`.
    pub positivity_floor: f64,
    pub negative: bool,
    pub records: u64,
}

/// `d/dt ∫θ = −L·Σ_k k·Im v(k)·|θ̂_k|²`, with `v` the velocity symbol. For Model 1
/// this is `‖Λ^{1/2}θ‖²`; for Model 2 `‖Λ^{1/2−α}θ‖²`.
pub fn mass_dissipation(theta: &SpectralField, model: &CompiledModel) -> f64 {
    if model.spec().linear_only {
        return 0.0;
    }
    let grid = theta.grid();
    let nyq = grid.nyquist_index();
    let c = theta.spectral();
    let sum: f64 = grid
        .wavenumbers()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != nyq)
        .map(|(i, &k)| k * model.spec().velocity_symbol(k).im * c[i].norm_sqr())
        .sum();
    grid.period() * sum
}

/// Pieces of `⟨rhs(θ), θ⟩ = −ν‖Λ^{γ/2}θ‖² − ε‖θ_x‖² + ½⟨u_x, θ²⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerms {
    pub rhs_pairing: f64,
    pub dissipation: f64,
    pub viscosity: f64,
    pub cubic: f64,
}

impl EnergyTerms {
    pub fn residual(&self) -> f64 {
        let scale = self.dissipation.abs() + self.viscosity.abs() + self.cubic.abs();
        let diff = self.rhs_pairing - (-self.dissipation - self.viscosity + self.cubic);
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }
}

pub fn energy_terms(theta: &SpectralField, model: &CompiledModel) -> Result<EnergyTerms> {
    let spec = model.spec();
    let rhs = model.rhs(theta)?;
    let cubic = if spec.linear_only {
        0.0
    } else {
        let ux = derivative(&model.velocity(theta), 1);
        0.5 * inner_product(&ux, &dealiased_product(theta, theta)?)?
    };
    Ok(EnergyTerms {
        rhs_pairing: inner_product(&rhs, theta)?,
        dissipation: spec.nu * sobolev_norm(theta, 0.5 * spec.gamma, true).powi(2),
        viscosity: spec.epsilon * sobolev_norm(theta, 1.0, true).powi(2),
        cubic,
    })
}

/// Instantaneous relative residual of the `L²` energy identity.
pub fn l2_energy_residual(theta: &SpectralField, spec: &ModelSpec) -> Result<f64> {
    let model = CompiledModel::new(spec, theta.grid())?;
    Ok(energy_terms(theta, &model)?.residual())
}

/// Streaming accumulator turning stepper states into [`RunRecord`]s.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    model: CompiledModel,
    lp: Option<DyadicPartition>,
    l1_0: f64,
    linf_0: f64,
    prev_linf: Option<f64>,
    mass_flux: CumulativeSimpson,
    negativity_tolerance: f64,
    summary: ResidualSummary,
}

impl Diagnostics {
    pub fn new(spec: &ModelSpec, theta0: &SpectralField) -> Result<Self> {
        let grid = theta0.grid();
        Ok(Diagnostics {
            model: CompiledModel::new(spec, grid)?,
            lp: DyadicPartition::new(grid).ok(),
            l1_0: lp_norm(theta0, 1.0)?,
            linf_0: lp_norm(theta0, f64::INFINITY)?,
            prev_linf: None,
            mass_flux: CumulativeSimpson::default(),
            negativity_tolerance: 1e-10,
            summary: ResidualSummary {
                positivity_floor: f64::INFINITY,
                mass_budget_max: f64::NEG_INFINITY,
                max_principle_increment: f64::NEG_INFINITY,
                ..Default::default()
            },
        })
    }

    pub fn summary(&self) -> &ResidualSummary {
        &self.summary
    }

    pub fn observe(&mut self, state: &StepperState) -> Result<RunRecord> {
        let theta = &state.theta;
        let spec = self.model.spec().clone();
        let rel = |x: f64, scale: f64| if scale > 0.0 { x / scale } else { x };

        let l1 = lp_norm(theta, 1.0)?;
        let linf = lp_norm(theta, f64::INFINITY)?;
        let min = theta.min();
        let mut norms = BTreeMap::new();
        norms.insert(NORM_L1.to_string(), l1);
        norms.insert(NORM_L2.to_string(), lp_norm(theta, 2.0)?);
        norms.insert(NORM_LINF.to_string(), linf);
        norms.insert(NORM_H_HALF.to_string(), sobolev_norm(theta, 0.5, true));
        norms.insert(NORM_H_GAMMA_HALF.to_string(), sobolev_norm(theta, 0.5 * spec.gamma, true));
        norms.insert(NORM_H2.to_string(), sobolev_norm(theta, 2.0, false));
        if let Some(lp) = &self.lp {
            norms.insert(NORM_BESOV.to_string(), lp.besov_norm(theta, 1.5, 2.0, 1.0)?.value);
        }

        let flux = self.mass_flux.push(state.t, mass_dissipation(theta, &self.model));
        let mass = rel(l1 + flux - self.l1_0, self.l1_0);
        let energy = energy_terms(theta, &self.model)?.residual();
        let increment = match self.prev_linf {
            Some(prev) => rel(linf - prev, self.linf_0),
            None => 0.0,
        };
        self.prev_linf = Some(linf);
        let floor = rel(min, self.linf_0);
        let negative = min < -self.negativity_tolerance * linf;

        let mut residuals = BTreeMap::new();
        residuals.insert(RES_MASS.to_string(), mass);
        residuals.insert(RES_ENERGY.to_string(), energy);
        residuals.insert(RES_MAX_PRINCIPLE.to_string(), increment);
        residuals.insert(RES_POSITIVITY.to_string(), floor);

        let s = &mut self.summary;
        s.mass_budget_max = s.mass_budget_max.max(mass);
        s.mass_budget_abs = s.mass_budget_abs.max(mass.abs());
        s.energy_identity_abs = s.energy_identity_abs.max(energy.abs());
        s.max_principle_increment = s.max_principle_increment.max(increment);
        s.positivity_floor = s.positivity_floor.min(floor);
        s.negative |= negative;
        s.records += 1;

        Ok(RunRecord {
            t: state.t,
            dt: state.dt,
            step: state.step_count,
            status: state.status,
            mean: theta.mean(),
            min,
            norms,
            residuals,
            negative: s.negative,
            blowup: state.indicator,
        })
    }
}

/// Besov norm at each record time.
pub fn besov_trajectory(records: &[RunRecord]) -> Vec<(f64, f64)> {
    records.iter().map(|r| (r.t, r.norm(NORM_BESOV))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingFit {
    pub initial: f64,
    /// First time the norm exceeds twice its initial value, linearly interpolated.
    pub doubling_time: Option<f64>,
    /// `doubling_time·‖θ_0‖` (or the run length times `‖θ_0‖` if no doubling).
    pub c_observed: f64,
    /// Largest ratio `‖θ(t)‖ / ‖θ_0‖` on `[0, c/‖θ_0‖]` for the supplied `c`.
    pub max_ratio_on_horizon: f64,
}

/// Locates the doubling time of a norm series and checks the bound on the
/// horizon `c / series[0]`.
pub fn doubling_fit(series: &[(f64, f64)], c: f64) -> Result<DoublingFit> {
    let (t0, b0) = *series.first().ok_or(Error::Degenerate("empty trajectory"))?;
    if !(b0 > 0.0) {
        return Err(Error::Degenerate("initial norm vanishes"));
    }
    let mut doubling_time = None;
    for w in series.windows(2) {
        let ((ta, a), (tb, b)) = (w[0], w[1]);
        if b > 2.0 * b0 {
            let s = if b > a { (2.0 * b0 - a) / (b - a) } else { 0.0 };
            doubling_time = Some(ta + s.clamp(0.0, 1.0) * (tb - ta));
            break;
        }
    }
    let t_end = series.last().map(|p| p.0).unwrap_or(t0);
    let c_observed = (doubling_time.unwrap_or(t_end) - t0) * b0;
    let horizon = t0 + c / b0;
    let max_ratio_on_horizon = series
        .iter()
        .filter(|(t, _)| *t <= horizon)
        .map(|(_, b)| b / b0)
        .fold(0.0, f64::max);
    Ok(DoublingFit {
        initial: b0,
        doubling_time,
        c_observed,
        max_ratio_on_horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// Constant calibrated on the first tenth of the run.
    pub calibrated_c: f64,
    /// Largest `(d/dt‖θ‖²_{H²}) / (‖θ‖³ + ‖θ‖⁴)` after the calibration window.
    pub max_ratio_after: f64,
    pub violations: usize,
}

/// Compares the observed growth of `‖θ‖²_{H²}` with `C(‖θ‖³_{H²} + ‖θ‖⁴_{H²})`,
/// where `C` is fitted on the first 10% of the samples.
pub fn h2_envelope(series: &[(f64, f64)]) -> Result<EnvelopeReport> {
    if series.len() < 20 {
        return Err(Error::Degenerate("need at least 20 samples"));
    }
    let ratios: Vec<f64> = series
        .windows(3)
        .map(|w| {
            let dt = w[2].0 - w[0].0;
            let d = (w[2].1.powi(2) - w[0].1.powi(2)) / dt;
            let x = w[1].1;
            d / (x.powi(3) + x.powi(4))
        })
        .collect();
    let split = (series.len() / 10).max(1);
    let calibrated_c = ratios[..split].iter().cloned().fold(0.0, f64::max);
    let tol = 1e-9 * (1.0 + calibrated_c);
    let after = &ratios[split..];
    Ok(EnvelopeReport {
        calibrated_c,
        max_ratio_after: after.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        violations: after.iter().filter(|&&r| r > calibrated_c + tol).count(),
    })
}

/// A nonnegative space-time test function vanishing at the final time.
pub trait SpaceTimeTest {
    fn value(&self, t: f64) -> SpectralField;
    fn time_derivative(&self, t: f64) -> SpectralField;
    fn final_time(&self) -> f64;
}

/// `ψ(t, x) = cos²(π(t − t0)/(2(T − t0)))·φ(x)`.
#[derive(Debug, Clone)]
pub struct SeparableTest {
    pub t0: f64,
    pub horizon: f64,
    pub profile: SpectralField,
}

impl SeparableTest {
    /// Profile `1 − cos(2π(x − c)/L)`: nonnegative, smooth, and convex around `c`.
    pub fn cosine_well(grid: &GridRef, center: f64, t0: f64, horizon: f64) -> Self {
        let k = grid.base_wavenumber();
        SeparableTest {
            t0,
            horizon,
            profile: SpectralField::from_fn(grid, |x| 1.0 - (k * (x - center)).cos()),
        }
    }

    fn phase(&self, t: f64) -> f64 {
        0.5 * std::f64::consts::PI * (t - self.t0) / (self.horizon - self.t0)
    }
}

impl SpaceTimeTest for SeparableTest {
    fn value(&self, t: f64) -> SpectralField {
        self.profile.scaled(self.phase(t).cos().powi(2))
    }

    fn time_derivative(&self, t: f64) -> SpectralField {
        let a = self.phase(t);
        let rate = 0.5 * std::f64::consts::PI / (self.horizon - self.t0);
        self.profile.scaled(-2.0 * a.cos() * a.sin() * rate)
    }

    fn final_time(&self) -> f64 {
        self.horizon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakFormReport {
    /// `∫∫[−θψ_t + (Hθ)θψ_x + Λ^{1/2}θ·[Λ^{1/2},ψ]θ + |Λ^{1/2}θ|²ψ] − ∫θ_0ψ(0)`.
    pub residual: f64,
    /// `ε∫∫θψ_xx`, which the residual equals for smooth regularized solutions.
    pub viscous_term: f64,
    /// `∫θ_0ψ(0)`, the natural size of the functional.
    pub scale: f64,
    pub samples: usize,
    pub quadrature: &'static str,
}

/// Evaluates the weak super-solution functional on snapshots `θ(t_i)`; the first
/// snapshot is the initial datum and the last time must be where `ψ` vanishes.
pub fn weak_form_residual(
    times: &[f64],
    snapshots: &[SpectralField],
    psi: &impl SpaceTimeTest,
    epsilon: f64,
) -> Result<WeakFormReport> {
    if times.len() != snapshots.len() || times.len() < 3 {
        return Err(Error::InvalidParameter("need at least three matching snapshots".into()));
    }
    let t_end = *times.last().unwrap();
    if (t_end - psi.final_time()).abs() > 1e-12 * t_end.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "trajectory ends at {t_end} but the test function vanishes at {}",
            psi.final_time()
        )));
    }
    let mut integrand = Vec::with_capacity(times.len());
    let mut viscous = Vec::with_capacity(times.len());
    for (&t, theta) in times.iter().zip(snapshots) {
        let p = psi.value(t);
        theta.check_grid(&p)?;
        let pmin = p.min();
        if pmin < 0.0 {
            return Err(Error::Negative { min: pmin, floor: 0.0 });
        }
        let half = lambda_pow(theta, 0.5);
        let transport = dealiased_product(&hilbert(theta), theta)?;
        let value = -inner_product(theta, &psi.time_derivative(t))?
            + inner_product(&transport, &derivative(&p, 1))?
            + inner_product(&half, &half_commutator(&p, theta)?)?
            + inner_product(&dealiased_product(&half, &half)?, &p)?;
        integrand.push(value);
        viscous.push(epsilon * inner_product(theta, &derivative(&p, 2))?);
    }
    let initial = inner_product(&snapshots[0], &psi.value(times[0]))?;
    Ok(WeakFormReport {
        residual: simpson(times, &integrand) - initial,
        viscous_term: simpson(times, &viscous),
        scale: initial.abs(),
        samples: times.len(),
        quadrature: "simpson",
    })
}
