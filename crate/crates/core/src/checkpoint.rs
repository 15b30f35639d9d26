//! Binary snapshots: `"NLT1"`, version (u16), n (u32), L (f64), t (f64), n point
//! values (f64), all little-endian, then an FNV-1a 64-bit checksum of everything
//! before it.

use std::fs;
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use thiserror::Error;

use crate::spectral::{GridRef, SpectralField};

pub const MAGIC: &[u8; 4] = b"NLT1";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 8 + 8;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("unsupported checkpoint version {0}")]
    Version(u16),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<CheckpointError> for crate::Error {
    fn from(e: CheckpointError) -> Self {
        crate::Error::InvalidParameter(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub period: f64,
    pub t: f64,
    pub values: Vec<f64>,
}

fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

impl Checkpoint {
    pub fn from_field(theta: &SpectralField, t: f64) -> Self {
        Checkpoint {
            period: theta.grid().period(),
            t,
            values: theta.physical().into_owned(),
        }
    }

    pub fn to_field(&self, grid: &GridRef) -> crate::Result<SpectralField> {
        if grid.period() != self.period {
            return Err(crate::Error::GridMismatch);
        }
        SpectralField::from_physical(grid, self.values.clone())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len() + 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.values.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.period.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let sum = checksum(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let corrupt = |m: &str| CheckpointError::Corrupt(m.to_string());
        if bytes.len() < HEADER_LEN + 8 {
            return Err(corrupt("file too short"));
        }
        if &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic bytes"));
        }
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let expected = HEADER_LEN + 8 * n + 8;
        if bytes.len() != expected {
            return Err(CheckpointError::Corrupt(format!(
                "expected {expected} bytes for n = {n}, found {}",
                bytes.len()
            )));
        }
        let body = &bytes[..expected - 8];
        if checksum(body) != u64_at(expected - 8) {
            return Err(corrupt("checksum mismatch"));
        }
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let values = (0..n).map(|i| f64::from_bits(u64_at(HEADER_LEN + 8 * i))).collect();
        Ok(Checkpoint {
            period: f64::from_bits(u64_at(10)),
            t: f64::from_bits(u64_at(18)),
            values,
        })
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
        fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        Self::decode(&fs::read(path)?)
    }
}
