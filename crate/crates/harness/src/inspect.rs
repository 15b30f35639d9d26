use std::path::Path;

use nlt_core::checkpoint::VERSION;
use nlt_core::Checkpoint;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointInfo {
    pub version: u16,
    pub n: usize,
    pub period: f64,
    pub t: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub checksum_ok: bool,
}

/// Reads a checkpoint (validating magic, version and checksum) and summarizes it.
pub fn inspect_checkpoint(path: &Path) -> Result<CheckpointInfo> {
    let cp = Checkpoint::read_file(path)?;
    let v = &cp.values;
    Ok(CheckpointInfo {
        version: VERSION,
        n: v.len(),
        period: cp.period,
        t: cp.t,
        min: v.iter().cloned().fold(f64::INFINITY, f64::min),
        max: v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        checksum_ok: true,
    })
}
