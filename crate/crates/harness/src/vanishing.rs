//! Vanishing-viscosity studies: one run per ε from the same initial datum, then
//! `L²_T L²` distances between consecutive members.

use std::path::Path;

use nlt_core::integrator::RunStatus;
use nlt_core::models::CompiledModel;
use nlt_core::quadrature::simpson;
use nlt_core::spectral::{lp_norm, make_grid, SpectralField};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::run::{resolve_horizon, simulate, write_json, RunSummary};

pub const REPORT_FILE: &str = "vanishing_viscosity.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViscosityReport {
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    pub sample_times: usize,
    /// `‖θ^{ε_i} − θ^{ε_{i+1}}‖_{L²_T L²}`.
    pub differences: Vec<f64>,
    pub strictly_decreasing: bool,
    /// Closed-form gaps of the linear flow; only filled for linear-only models.
    pub analytic_differences: Option<Vec<f64>>,
    pub analytic_max_deviation: Option<f64>,
    pub members: Vec<RunSummary>,
}

/// `∫_0^T e^{−rt} dt`.
fn decay_integral(rate: f64, horizon: f64) -> f64 {
    if rate == 0.0 {
        horizon
    } else {
        -(-rate * horizon).exp_m1() / rate
    }
}

/// Exact `L²_T L²` distance between two linear flows from the same datum.
pub fn linear_flow_gap(theta0: &SpectralField, a: &CompiledModel, b: &CompiledModel, horizon: f64) -> f64 {
    let period = theta0.grid().period();
    let total: f64 = theta0
        .spectral()
        .iter()
        .zip(a.linear_symbol().iter().zip(b.linear_symbol()))
        .map(|(c, (&la, &lb))| {
            let (ra, rb) = (-la, -lb);
            let gap = decay_integral(2.0 * ra, horizon) - 2.0 * decay_integral(ra + rb, horizon)
                + decay_integral(2.0 * rb, horizon);
            period * c.norm_sqr() * gap.max(0.0)
        })
        .sum();
    total.sqrt()
}

/// Runs the ε list from the config's `[vanishing_viscosity]` table, or `epsilons`
/// when given, on `workers` threads.
pub fn vanishing_viscosity(
    cfg: &ExperimentConfig,
    epsilons: Option<&[f64]>,
    workers: usize,
    out: Option<&Path>,
) -> Result<ViscosityReport> {
    let mut cfg = cfg.clone();
    let vv = cfg
        .vanishing_viscosity
        .as_mut()
        .ok_or_else(|| HarnessError::Config("config has no [vanishing_viscosity] table".into()))?;
    if let Some(list) = epsilons {
        vv.epsilons = list.to_vec();
    }
    let vv = vv.clone();
    cfg.validate()?;

    let grid = make_grid(cfg.grid.n, cfg.grid.period).map_err(|e| HarnessError::Config(e.to_string()))?;
    let theta0 = cfg.initial.build(&grid).map_err(|e| HarnessError::Config(e.to_string()))?;
    // Every member uses the same fixed horizon, including when "auto" is requested.
    let (horizon, _) = resolve_horizon(&cfg, &theta0)?;

    let members: Vec<ExperimentConfig> = vv
        .epsilons
        .iter()
        .map(|&eps| {
            let mut m = cfg.clone();
            m.vanishing_viscosity = None;
            m.sweep = None;
            m.model.epsilon = eps;
            m.horizon = crate::config::Horizon::Fixed(horizon);
            m.outputs.sample_interval = Some(vv.sample_interval);
            m.name = Some(format!("epsilon={eps:e}"));
            m
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Study(e.to_string()))?;
    let outcomes: Vec<_> = pool.install(|| {
        members
            .par_iter()
            .enumerate()
            .map(|(i, m)| {
                let dir = out.map(|d| d.join("members").join(format!("{i:04}")));
                simulate(m, dir.as_deref())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for o in &outcomes {
        if o.status() != RunStatus::Finished {
            return Err(HarnessError::MemberFailed {
                label: o.summary.name.clone().unwrap_or_default(),
                status: o.status().label().to_string(),
            });
        }
    }

    let times: Vec<f64> = outcomes[0].samples.iter().map(|(t, _)| *t).collect();
    let mut differences = Vec::new();
    for pair in outcomes.windows(2) {
        let (a, b) = (&pair[0].samples, &pair[1].samples);
        let sq = a
            .iter()
            .zip(b)
            .map(|((_, x), (_, y))| Ok(lp_norm(&x.sub(y)?, 2.0)?.powi(2)))
            .collect::<Result<Vec<f64>>>()?;
        differences.push(simpson(&times, &sq).max(0.0).sqrt());
    }
    let strictly_decreasing = differences.windows(2).all(|w| w[1] < w[0]);

    let (analytic_differences, analytic_max_deviation) = if cfg.model.linear_only {
        let models = members
            .iter()
            .map(|m| CompiledModel::new(&m.model, &grid))
            .collect::<nlt_core::Result<Vec<_>>>()?;
        let gaps: Vec<f64> = models
            .windows(2)
            .map(|w| linear_flow_gap(&theta0, &w[0], &w[1], horizon))
            .collect();
        let dev = gaps
            .iter()
            .zip(&differences)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (Some(gaps), Some(dev))
    } else {
        (None, None)
    };

    let report = ViscosityReport {
        epsilons: vv.epsilons.clone(),
        horizon,
        sample_times: times.len(),
        differences,
        strictly_decreasing,
        analytic_differences,
        analytic_max_deviation,
        members: outcomes.into_iter().map(|o| o.summary).collect(),
    };
    if let Some(dir) = out {
        write_json(&dir.join(REPORT_FILE), &report)?;
    }
    Ok(report)
}
