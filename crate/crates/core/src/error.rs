use thiserror::Error;

use crate::families::SeparationViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} is outside the cached window [{lo}, {hi}]")]
    OutOfWindow { index: i64, lo: i64, hi: i64 },

    #[error("weight rule is not invertible (inf |w_n| = {inf_abs}, sup |w_n| = {sup_abs})")]
    NotInvertible { inf_abs: f64, sup_abs: f64 },

    #[error("invalid weight rule: {0}")]
    InvalidWeight(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("family fails the separation check: {0}")]
    Separation(SeparationViolation),

    #[error("horizon {horizon} is too small: {reason}")]
    HorizonTooSmall { horizon: u64, reason: String },

    #[error("pruning emptied A_{p} up to horizon {horizon}; use a larger K")]
    EmptyAfterPruning { p: usize, horizon: u64 },

    #[error("unsupported space {space}: {reason}")]
    UnsupportedSpace { space: String, reason: String },

    #[error("target #{index} is not admissible for any p <= {max_p}; minimal admissible p is {minimal_p}")]
    TargetNotAdmissible { index: usize, minimal_p: usize, max_p: usize },

    #[error("coefficient collision at index {index}: written by (p={first_p}, n={first_n}) and (p={second_p}, n={second_n})")]
    Collision {
        index: i64,
        first_p: usize,
        first_n: u64,
        second_p: usize,
        second_n: u64,
    },

    #[error("window {window} is too small: need at least {required}")]
    WindowTooSmall { window: i64, required: i64 },

    #[error("orbit bound exceeded at q={q}, m={m}: error {error:e} > bound {bound:e}")]
    BoundExceeded {
        q: usize,
        m: u64,
        error: f64,
        bound: f64,
        /// Largest contributing terms as (index, modulus).
        terms: Vec<(i64, f64)>,
    },

    #[error("exact arithmetic unavailable: {0}")]
    NotExact(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
