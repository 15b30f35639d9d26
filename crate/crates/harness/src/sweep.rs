//! Parameter sweeps over the cartesian product of the configured lists.

use std::path::Path;

use nlt_core::models::classify_regime;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, SweepGrid};
use crate::error::{HarnessError, Result};
use crate::run::simulate;

pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub family: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub n: usize,
    pub regime: String,
    pub expects_global: bool,
    pub status: String,
    pub t_final: f64,
    pub horizon: f64,
    pub mass_budget_abs: f64,
    pub energy_identity_abs: f64,
    pub max_principle_increment: f64,
    pub positivity_floor: f64,
    pub gradient_growth: f64,
    pub error: String,
}

/// Expands the grid in row-major order (α, β, γ, ε, n); unset axes keep the base value.
pub fn sweep_points(base: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    if grid.alpha.is_empty() && grid.beta.is_empty() && grid.gamma.is_empty() && grid.epsilon.is_empty() && grid.n.is_empty()
    {
        return Err(HarnessError::Config("sweep grid is empty".into()));
    }
    let or_base = |v: &[f64], b: f64| if v.is_empty() { vec![b] } else { v.to_vec() };
    let ns = if grid.n.is_empty() { vec![base.grid.n] } else { grid.n.clone() };
    let mut points = Vec::new();
    for &alpha in &or_base(&grid.alpha, base.model.alpha) {
        for &beta in &or_base(&grid.beta, base.model.beta) {
            for &gamma in &or_base(&grid.gamma, base.model.gamma) {
                for &epsilon in &or_base(&grid.epsilon, base.model.epsilon) {
                    for &n in &ns {
                        points.push(SweepPoint {
                            alpha,
                            beta,
                            gamma,
                            epsilon,
                            n,
                        });
                    }
                }
            }
        }
    }
    Ok(points)
}

pub fn member_config(base: &ExperimentConfig, p: &SweepPoint) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.sweep = None;
    cfg.model.alpha = p.alpha;
    cfg.model.beta = p.beta;
    cfg.model.gamma = p.gamma;
    cfg.model.epsilon = p.epsilon;
    cfg.grid.n = p.n;
    cfg
}

fn run_member(base: &ExperimentConfig, index: usize, p: &SweepPoint, out: Option<&Path>) -> SweepRow {
    let cfg = member_config(base, p);
    let report = classify_regime(&cfg.model);
    let mut row = SweepRow {
        index,
        family: format!("{:?}", cfg.model.family).to_lowercase(),
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma,
        epsilon: p.epsilon,
        n: p.n,
        regime: report.regime.label().to_string(),
        expects_global: report.expects_global,
        status: "error".into(),
        t_final: f64::NAN,
        horizon: f64::NAN,
        mass_budget_abs: f64::NAN,
        energy_identity_abs: f64::NAN,
        max_principle_increment: f64::NAN,
        positivity_floor: f64::NAN,
        gradient_growth: f64::NAN,
        error: String::new(),
    };
    let dir = out.map(|d| d.join("members").join(format!("{index:04}")));
    match simulate(&cfg, dir.as_deref()) {
        Ok(o) => {
            let s = o.summary;
            row.status = s.status.label().to_string();
            row.t_final = s.t_final;
            row.horizon = s.horizon;
            row.mass_budget_abs = s.residuals.mass_budget_abs;
            row.energy_identity_abs = s.residuals.energy_identity_abs;
            row.max_principle_increment = s.residuals.max_principle_increment;
            row.positivity_floor = s.residuals.positivity_floor;
            row.gradient_growth = s.gradient_growth;
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

/// Runs every point on `workers` threads; member failures are recorded per row.
pub fn sweep(base: &ExperimentConfig, workers: usize, out: Option<&Path>) -> Result<Vec<SweepRow>> {
    base.validate()?;
    let grid = base
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Config("config has no [sweep] table".into()))?;
    let points = sweep_points(base, grid)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Study(e.to_string()))?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| run_member(base, i, p, out))
            .collect()
    });
    rows.sort_by_key(|r| r.index);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        write_csv(&dir.join(SWEEP_FILE), &rows)?;
    }
    Ok(rows)
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}
