use alloc::string::String;
use core::fmt;

/// Errors raised by the simulation, set-algebra and oracle routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A process or experiment description is inconsistent.
    InvalidSpec(String),
    /// The requested law or family has no supported closed form.
    Unsupported(String),
    /// An operation that needs at least one sample received none.
    EmptyPath,
    /// Contact tolerances must be non-negative.
    NegativeTolerance(f64),
    /// A slope parameter or slope grid is unusable.
    InvalidAlpha(String),
    /// Two sets (or a set and a point) live on different windows.
    WindowMismatch,
    /// No contact point below zero: the simulation window is too short.
    WindowTooSmall,
    /// The swept values decreased by more than the grid resolution allows.
    Monotonicity { alpha: f64, drop: f64 },
    /// An oracle was evaluated outside its domain of validity.
    Domain(String),
    /// Adaptive quadrature did not reach the requested tolerance.
    Quadrature { value: f64, error: f64 },
    /// Sweep results cannot be pooled together.
    IncompatibleSweeps(String),
    /// Generic invalid argument.
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "invalid process specification: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::EmptyPath => f.write_str("path has no samples"),
            Error::NegativeTolerance(tol) => write!(f, "contact tolerance must be >= 0, got {tol}"),
            Error::InvalidAlpha(msg) => write!(f, "invalid slope: {msg}"),
            Error::WindowMismatch => f.write_str("sets are defined on different windows"),
            Error::WindowTooSmall => {
                f.write_str("no contact point before time 0; enlarge the window half-width")
            }
            Error::Monotonicity { alpha, drop } => write!(
                f,
                "sweep value decreased by {drop} at alpha = {alpha}, beyond grid resolution"
            ),
            Error::Domain(msg) => write!(f, "outside oracle domain: {msg}"),
            Error::Quadrature { value, error } => write!(
                f,
                "quadrature did not converge (estimate {value}, error estimate {error})"
            ),
            Error::IncompatibleSweeps(msg) => write!(f, "cannot merge sweeps: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
