use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed validation. `name` is the offending key.
    InvalidParameter { name: &'static str, reason: String },
    /// Two fields or paths that must share a layout do not.
    Shape(String),
    /// The operation is not defined for the given inputs.
    Usage(String),
    /// The integrator left its stability envelope.
    BlowUp { time: f64, norm: f64 },
    /// An iterative procedure ran out of budget.
    NonConvergence { what: &'static str, detail: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// True for failures of the numerics rather than of the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::BlowUp { .. } | Error::NonConvergence { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::Shape(m) => write!(f, "shape mismatch: {m}"),
            Error::Usage(m) => write!(f, "{m}"),
            Error::BlowUp { time, norm } => {
                write!(f, "blow-up at t = {time}: L2 norm reached {norm:e}")
            }
            Error::NonConvergence { what, detail } => write!(f, "{what} did not converge: {detail}"),
        }
    }
}

impl core::error::Error for Error {}
