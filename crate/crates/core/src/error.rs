use thiserror::Error;

use crate::reconstruction::StitchedJsa;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The fringe period `2π/τ` is too short for the grid spacing.
    #[error("delay aliasing: fringe period is {fringe_period_bins:.3} bins, need at least {required_bins}")]
    Aliasing {
        fringe_period_bins: f64,
        required_bins: f64,
    },

    #[error("no sideband: {0}")]
    NoSideband(String),

    #[error("filter overlaps baseband: centre is {distance_widths:.3} widths from the origin, need at least 3")]
    FilterOverlapsBaseband { distance_widths: f64 },

    #[error("reference too narrow: {masked_fraction:.3} of signal-support bins masked")]
    ReferenceTooNarrow { masked_fraction: f64 },

    #[error("zero matrix: {0}")]
    ZeroMatrix(&'static str),

    #[error("phase stitching underdetermined: support splits into {components} disconnected components")]
    StitchingUnderdetermined {
        components: usize,
        partial: Box<StitchedJsa>,
    },

    #[error("phase unwrap failure: residual jump of {jump:.3} rad between accepted neighbours at {at:?}")]
    UnwrapFailure { jump: f64, at: (usize, usize) },

    #[error("insufficient fringes: {0}")]
    InsufficientFringes(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("decreasing timestamp at byte {offset}: {current} ps after {previous} ps")]
    DecreasingTimestamp {
        offset: u64,
        previous: u64,
        current: u64,
    },

    #[error("coincidence window {window_ps} ps exceeds half the repetition period ({limit_ps} ps)")]
    CoincidenceWindow { window_ps: f64, limit_ps: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse failure category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Precondition,
    Corruption,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_)
            | Error::GridMismatch(_)
            | Error::Aliasing { .. }
            | Error::FilterOverlapsBaseband { .. }
            | Error::ReferenceTooNarrow { .. }
            | Error::CoincidenceWindow { .. } => ErrorKind::Precondition,
            Error::Format { .. } | Error::DecreasingTimestamp { .. } => ErrorKind::Corruption,
            Error::NoSideband(_)
            | Error::ZeroMatrix(_)
            | Error::StitchingUnderdetermined { .. }
            | Error::UnwrapFailure { .. }
            | Error::InsufficientFringes(_) => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
