use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 8")]
    InvalidGridSize(usize),
    #[error("grid period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shell {j} outside the resolvable range [{min}, {max}]")]
    ShellOutOfRange { j: i32, min: i32, max: i32 },
    #[error("dyadic shell {0} carries no energy")]
    EmptyShell(i32),
    #[error("degenerate ratio: {0}")]
    Degenerate(&'static str),
    #[error("field contains NaN or infinite values")]
    NonFinite,
    #[error("field is negative (min {min:e}, allowed floor {floor:e})")]
    Negative { min: f64, floor: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
