use core::fmt;

/// Failure classes shared by every module.
///
/// The command line maps these onto exit codes, so the variants are grouped by
/// *who* is at fault: the caller's configuration, the working precision, or an
/// internal cross-check that disagreed with itself.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Inputs violate an operation's precondition.
    Config(&'static str),
    /// A bit stream does not reach the requested horizon.
    Horizon { needed: usize, available: usize },
    /// Working precision is exhausted before the requested depth.
    Precision(&'static str),
    /// A truncation dimension is too small for the requested computation.
    Size { needed: usize, available: usize },
    /// Two independent routes to the same quantity disagree.
    Consistency { what: &'static str, deviation: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Horizon { needed, available } => write!(
                f,
                "bit stream too short: need {needed} bits, have {available}"
            ),
            Error::Precision(msg) => write!(f, "precision exhausted: {msg}"),
            Error::Size { needed, available } => write!(
                f,
                "truncation too small: need dimension {needed}, have {available}"
            ),
            Error::Consistency { what, deviation } => {
                write!(f, "internal consistency check failed: {what} (deviation {deviation:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
