//! Crate-wide error type. Precondition violations are reported, never
//! silently clamped.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} outside walk range [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("time {t} outside [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("empty or inverted range [{lo}, {hi}]")]
    BadRange { lo: usize, hi: usize },

    #[error("schedule step index overflows u64 at level {level}")]
    ScheduleOverflow { level: usize },

    #[error("invalid schedule: {reason}")]
    BadSchedule { reason: String },

    #[error("level {k} outside schedule levels [1, {max}]")]
    LevelOutOfRange { k: usize, max: usize },

    #[error("state holds {len} steps but level {k} needs {needed}")]
    StateTooShort { len: usize, k: usize, needed: u64 },

    #[error("hitting probability start {x} must satisfy 0 < |x| < {n}")]
    BadHittingStart { x: crate::point::LatticePoint, n: i64 },

    #[error("parameter {name} = {value} violates {constraint}")]
    BadParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("linear solve residual {achieved:.3e} above target {target:.3e}")]
    ResidualNotCertified { achieved: f64, target: f64 },

    #[error("malformed realization container: {reason}")]
    BadContainer { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
