//! Error type shared by every module in the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong when building models or evaluating them.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter violated its admissible range.
    InvalidParameter {
        /// Parameter name as it appears in the API.
        name: &'static str,
        /// Offending value.
        value: f64,
        /// Human-readable constraint, e.g. `"must be finite and > 0"`.
        constraint: &'static str,
    },
    /// Two inputs disagreed on a dimension.
    ShapeMismatch {
        /// What was being matched, e.g. `"allocation columns vs. loss factors"`.
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// A matrix failed validation.
    InvalidMatrix { reason: String },
    /// A spectral measure failed validation.
    InvalidMeasure { reason: String },
    /// The operation needs a canonical (standardized) spectral measure.
    NotCanonical,
    /// Standardization requires every marginal tail weight to be positive.
    DegenerateMargin { coordinate: usize },
    /// Scenario probabilities must be positive and sum to one.
    InvalidScenarioWeights { sum: f64 },
    /// Exact enumeration of the sharing graph would be too large.
    EnumerationTooLarge { random_edges: usize, max: usize },
    /// Exact expectation is impossible for black-box samplers.
    ExactUnsupported,
    /// A black-box sampler returned an unusable matrix.
    SamplerOutputInvalid { reason: String },
    /// Rejection sampling under the resample policy gave up.
    ResampleExhausted { attempts: usize },
    /// Tail probability levels must lie strictly between zero and one.
    InvalidGamma { gamma: f64 },
    /// Tail levels for a study must be strictly decreasing.
    UnorderedGammaGrid,
    /// The tail mean diverges, so conditional tail expectations do not exist.
    InfiniteMean { alpha: f64 },
    /// No sample value strictly exceeds the empirical quantile.
    EmptyTail,
    /// The sample is too small for the requested estimate.
    SampleTooSmall { needed: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value, constraint } => {
                write!(f, "parameter `{name}` = {value} is invalid: {constraint}")
            }
            Error::ShapeMismatch { context, expected, found } => {
                write!(f, "shape mismatch ({context}): expected {expected}, found {found}")
            }
            Error::InvalidMatrix { reason } => write!(f, "invalid matrix: {reason}"),
            Error::InvalidMeasure { reason } => write!(f, "invalid spectral measure: {reason}"),
            Error::NotCanonical => {
                write!(f, "operation requires a canonical spectral measure; call canonicalize first")
            }
            Error::DegenerateMargin { coordinate } => {
                write!(f, "marginal tail weight at coordinate {coordinate} vanishes; cannot standardize")
            }
            Error::InvalidScenarioWeights { sum } => {
                write!(f, "scenario probabilities must be positive and sum to 1 (got sum = {sum})")
            }
            Error::EnumerationTooLarge { random_edges, max } => write!(
                f,
                "exact enumeration over {random_edges} random edges exceeds the cap of {max}; use Monte Carlo"
            ),
            Error::ExactUnsupported => {
                write!(f, "exact expectation is not available for black-box samplers")
            }
            Error::SamplerOutputInvalid { reason } => {
                write!(f, "sampler returned an invalid matrix: {reason}")
            }
            Error::ResampleExhausted { attempts } => write!(
                f,
                "no sharing graph with fully covered risks found after {attempts} resampling attempts"
            ),
            Error::InvalidGamma { gamma } => {
                write!(f, "tail level gamma = {gamma} must lie strictly in (0, 1)")
            }
            Error::UnorderedGammaGrid => write!(f, "tail level grid must be strictly decreasing"),
            Error::InfiniteMean { alpha } => write!(
                f,
                "tail index alpha = {alpha} <= 1: the tail mean diverges and no conditional tail expectation exists"
            ),
            Error::EmptyTail => {
                write!(f, "no sample value strictly exceeds the empirical quantile")
            }
            Error::SampleTooSmall { needed, found } => {
                write!(f, "sample too small: need at least {needed} values, found {found}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
