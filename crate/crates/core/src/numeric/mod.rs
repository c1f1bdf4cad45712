//! Numeric realization of the Miura transformation.
//!
//! Flat frames of the companion connection are integrated along polygonal
//! paths, Gauss-factorized into `N₋ B₊`, and the free fields are read off
//! `N₋`. Off the big cell the factorization fails; that is reported per
//! sample instead of aborting.

mod fd;
mod freefield;
mod gauss;
mod integrate;
mod monodromy;
mod path;
mod potential;

use thiserror::Error;

pub use fd::{central_weights, fornberg_weights};
pub use freefield::{
    free_fields_along_path, verify_miura_numeric, FreeFieldOptions, FreeFieldSample,
    FreeFieldTrace, MiuraNumericReport, ResidualPoint,
};
pub use gauss::{gauss_factorize, leading_minors, GaussResult};
pub use integrate::{integrate_fundamental, FundamentalSolution, IntegrationOptions, Sample};
pub use monodromy::{monodromy, MonodromyResult};
pub use path::{Path, PathFile, DEFAULT_SAMPLES_HINT};
pub use potential::{polynomial_roots, PotentialFile, PotentialSpec, RationalFile, RationalFunction};

use crate::diffalg::DiffAlgError;
use crate::gauge::GaugeError;

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("pole {pole} is {distance:e} from the path, inside the exclusion radius {radius:e}")]
    PoleTooClose { pole: C64, distance: f64, radius: f64 },
    #[error("step size underflow near z = {z}")]
    StepUnderflow { z: C64 },
    #[error("big-cell violation at z = {z}")]
    BigCellViolation { z: C64 },
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("loop is not closed")]
    NotClosed,
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid initial frame: {0}")]
    InvalidFrame(String),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    DiffAlg(#[from] DiffAlgError),
}

impl NumericError {
    /// Malformed input as opposed to a failure of the computation itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            NumericError::InvalidPotential(_)
                | NumericError::InvalidPath(_)
                | NumericError::InvalidFrame(_)
                | NumericError::NotClosed
                | NumericError::Gauge(GaugeError::RankTooSmall(_))
                | NumericError::Gauge(GaugeError::GuardExceeded { .. })
        )
    }
}

/// Parses `[[[re, im], ...], ...]` (rows) into a square matrix.
pub fn matrix_from_json(s: &str) -> Result<CMatrix, NumericError> {
    let rows: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(s).map_err(|e| NumericError::InvalidFrame(e.to_string()))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(NumericError::InvalidFrame("matrix must be square and nonempty".into()));
    }
    let flat: Vec<C64> = rows.iter().flatten().map(|&[re, im]| c64(re, im)).collect();
    Ok(CMatrix::from_row_slice(n, n, &flat))
}

/// Rows of `[re, im]` pairs.
pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}
