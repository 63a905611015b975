use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variants split into two families: validation failures (bad input, unmet
/// preconditions) and numerical-diagnostic failures (the computation ran but
/// its own diagnostics say the answer cannot be trusted). The CLI maps them
/// to exit codes 2 and 3 respectively.
#[derive(Debug, Error)]
pub enum Error {
    #[error("moments are not standardized: {0}")]
    NonStandardized(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("order {order} out of range (max {max})")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("coefficient c_{j} needs cumulants up to order {needed}, have {have}")]
    InsufficientCumulants { j: usize, needed: usize, have: usize },

    #[error("quadrature needs at least {needed} nodes, got {got}")]
    InsufficientNodes { needed: usize, got: usize },

    #[error("unsupported distribution family: {0}")]
    UnsupportedFamily(String),

    #[error("grid too coarse: clamped mass {clamped:e} exceeds {limit:e}")]
    GridTooCoarse { clamped: f64, limit: f64 },

    #[error("threshold too low: mass above threshold is {b} (must be < 1/2)")]
    ThresholdTooLow { b: f64 },

    #[error("density is bounded by the threshold; no truncation needed")]
    DensityBounded,

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("relative entropy {value:e} is below the numerical floor")]
    NegativeEntropyBeyondFloor { value: f64 },

    #[error("cumulant gamma_{order} = {value:e} should vanish")]
    CumulantAssumptionViolated { order: usize, value: f64 },

    #[error("mixing measure calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures reported by numerical diagnostics rather than input validation.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::GridTooCoarse { .. }
                | Error::QuadratureFailure(_)
                | Error::NegativeEntropyBeyondFloor { .. }
                | Error::CalibrationFailure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
