use core::fmt;

/// Errors raised by bound computations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(&'static str),
    /// No point up to the search limit satisfies the requested tail level.
    Unattainable { delta: f64, u_max: f64 },
    /// Adaptive quadrature ran out of subdivisions before meeting tolerance.
    QuadratureFailed { estimate: f64, error: f64 },
    /// A value exceeded the representable range.
    Overflow(&'static str),
    /// A data stream ended before a stopping rule fired.
    StreamExhausted { consumed: u64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Unattainable { delta, u_max } => {
                write!(f, "tail level {delta} is not reached for u <= {u_max}")
            }
            Error::QuadratureFailed { estimate, error } => {
                write!(f, "quadrature did not converge (estimate {estimate:e}, error {error:e})")
            }
            Error::Overflow(what) => write!(f, "overflow while computing {what}"),
            Error::StreamExhausted { consumed } => {
                write!(f, "stream exhausted after {consumed} values without stopping")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
