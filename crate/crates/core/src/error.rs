use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid point count must be even and >= 8, got {0}")]
    InvalidPointCount(usize),
    #[error("grid length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("derivative order must be 1, 2 or 3, got {0}")]
    InvalidDerivativeOrder(u32),
    #[error("field length {got} does not match grid size {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite value in field {field} at t = {t} (step {step})")]
    NonFinite { field: &'static str, t: f64, step: u64 },
    #[error("time t = {0} must exceed 1 for the virial scaling schedule")]
    TimeNotAfterOne(f64),
    #[error("profile not negligible at the box boundary (max |value| = {0:e})")]
    ProfileAtBoundary(f64),
    #[error("degenerate seed: {0}")]
    DegenerateSeed(&'static str),
    #[error("ground-state iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("region [{lo}, {hi}] exceeds the box [{box_lo}, {box_hi}]")]
    RegionOutsideBox { lo: f64, hi: f64, box_lo: f64, box_hi: f64 },
    #[error("budget window: {0}")]
    BadWindow(String),
    #[error("empty series")]
    EmptySeries,
    #[error("observer failed: {0}")]
    Observer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
