//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A request exceeded a hard resource cap (sieve size, qubit count, ...).
    #[error("{what}: requested {requested} exceeds the configured cap of {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    /// An integer argument fell outside its documented range.
    #[error("{what}: {value} is outside the supported range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: u64,
        min: u64,
        max: u64,
    },

    /// A prime factor of the input is not representable in the given table.
    #[error("prime factor {prime} of {n} is not contained in the {table_len}-entry prime table")]
    FactorOutsideTable {
        n: u64,
        prime: u64,
        table_len: usize,
    },

    /// A user-supplied spectrum or weight list failed validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An amplitude or weight vector is not normalized to unit probability.
    #[error("vector has squared norm {norm_sq} but must be 1 within {tol}")]
    NotNormalized { norm_sq: f64, tol: f64 },

    /// The preparation target carries zero weight, so sampling would never halt.
    #[error("window weight of the target integer is zero; preparation would never halt")]
    UnreachableTarget,

    /// A superpotential diverged before the configured minimum half-width.
    #[error(
        "superpotential {k} exceeded {threshold:.1e} at |x| = {reached:.4} \
         (minimum usable half-width is {min_half_width})"
    )]
    Blowup {
        k: usize,
        reached: f64,
        threshold: f64,
        min_half_width: f64,
    },

    /// Grid refinement moved the recovered eigenvalues by more than the tolerance.
    #[error("grid too coarse: refinement changed eigenvalues by {max_change:.3e} (> {tol:.3e})")]
    GridTooCoarse { max_change: f64, tol: f64 },

    /// A data file (CSV potential table, JSON coupling set) failed to parse.
    #[error("malformed table: {0}")]
    MalformedTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the error reflects a violated precondition rather than a
    /// numerical failure discovered during computation.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Blowup { .. } | Error::GridTooCoarse { .. })
    }
}
