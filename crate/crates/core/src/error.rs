use ndarray::Array2;
use thiserror::Error;

use crate::group::GroupCoefficients;
use crate::signal::{DecompositionResult, ImfComponent};
use crate::Real;

/// Work that was completed before a solver gave up.
#[derive(Debug, Clone)]
pub enum Partial<T: Real> {
    Component(Box<ImfComponent<T>>),
    Decomposition(Box<DecompositionResult<T>>),
}

#[derive(Debug, Error)]
pub enum Error<T: Real> {
    #[error("sample times are not strictly increasing at index {index}")]
    NonMonotoneTime { index: usize },

    #[error("row {row} has {found} samples, expected {expected}")]
    ShapeMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("need at least {required} samples, got {found}")]
    TooFewSamples { found: usize, required: usize },

    #[error("phase decreases at grid interval {index}")]
    NonMonotonePhase { index: usize },

    #[error("phase span {span} is shorter than one full oscillation")]
    DegeneratePhase { span: f64 },

    #[error("shifted band of half-width {band} exceeds the limit {limit} of the grid")]
    BandOverflow { band: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("phase iteration stalled: update norm {update_norm} > {tolerance}")]
    NoConvergence {
        update_norm: f64,
        tolerance: f64,
        partial: Partial<T>,
    },

    #[error("ALM iteration hit {iterations} iterations, constraint residual {residual}")]
    MaxItersExceeded {
        iterations: usize,
        residual: f64,
        coefficients: Box<GroupCoefficients<T>>,
        outliers: Option<Box<Array2<T>>>,
    },

    #[error("all residual rows are below tolerance")]
    ZeroResidual,

    #[error("row {row} has no observed samples")]
    AllMissing { row: usize },

    #[error("frequency is not positive at index {index}")]
    NonPositiveFrequency { index: usize },
}

impl<T: Real> Error<T> {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonMonotoneTime { .. } => "NonMonotoneTime",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::NonMonotonePhase { .. } => "NonMonotonePhase",
            Error::DegeneratePhase { .. } => "DegeneratePhase",
            Error::BandOverflow { .. } => "BandOverflow",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::MaxItersExceeded { .. } => "MaxItersExceeded",
            Error::ZeroResidual => "ZeroResidual",
            Error::AllMissing { .. } => "AllMissing",
            Error::NonPositiveFrequency { .. } => "NonPositiveFrequency",
        }
    }

    /// True for iteration failures, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::MaxItersExceeded { .. }
        )
    }
}

pub type Result<V, T> = std::result::Result<V, Error<T>>;
