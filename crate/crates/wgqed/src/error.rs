use std::fmt;

/// Everything that can go wrong while setting up a geometry or evaluating an
/// observable. Physics edge cases get their own variants so callers can react
/// to them (e.g. a sweep turning a below-band point into a flagged row instead
/// of aborting); plain bad arguments are lumped into `Invalid`.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a precondition that has no physical reading
    /// (non-finite input, non-positive length, zero width, ...).
    Invalid(String),
    /// The requested transverse mode does not propagate at this frequency:
    /// `omega0` lies at or below the mode's cutoff.
    ChannelClosed { omega0: f64, cutoff: f64 },
    /// The energy sits exactly on the square-root branch point of a channel,
    /// where the self-energy diverges.
    BranchPoint { energy: f64 },
    /// The requested detuning lies below the band minimum of the open
    /// channel, outside the single-photon scattering continuum.
    BelowBandMinimum { detuning: f64, band_min: f64 },
    /// The closed channel carries no coupling, so the pole equation has no
    /// solution; `limit` is the band-edge detuning the root would approach.
    NoBoundState { limit: f64 },
    /// An iterative routine failed to reach its target accuracy.
    NoConvergence(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::ChannelClosed { omega0, cutoff } => write!(
                f,
                "channel closed: omega0 = {omega0} does not exceed the mode cutoff {cutoff}"
            ),
            Error::BranchPoint { energy } => {
                write!(f, "energy {energy} sits on a dispersion branch point")
            }
            Error::BelowBandMinimum { detuning, band_min } => write!(
                f,
                "detuning {detuning} lies below the band minimum {band_min}"
            ),
            Error::NoBoundState { limit } => write!(
                f,
                "no bound state: the closed channel is uncoupled (pole would sit at the band edge {limit})"
            ),
            Error::NoConvergence(msg) => write!(f, "no convergence: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects non-finite values with a uniform message; used by every
/// constructor that takes raw floats.
pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Invalid(format!("{name} must be finite, got {value}")))
    }
}
