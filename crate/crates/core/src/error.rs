use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: bad partition, out-of-range parameter, missing pair.
    Validation(String),
    /// The request exceeds the configured size limit of an exponential routine.
    Capacity { what: String, n: usize, max_n: usize, cost: String },
    /// The solution handed to a rounding routine has no usable support.
    Infeasible(String),
    /// The simplex did not converge; residual diagnostics attached.
    Solver { status: String, max_violation: f64, iterations: usize },
    /// A cell of the discretization contains no triangle.
    EmptyCell,
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::Capacity { what, n, max_n, cost } => {
                write!(f, "capacity error: {what} with n = {n} exceeds max_n = {max_n} ({cost})")
            }
            Error::Infeasible(msg) => write!(f, "infeasible solution: {msg}"),
            Error::Solver { status, max_violation, iterations } => {
                write!(f, "LP solver failed ({status}) after {iterations} iterations, max violation {max_violation:e}")
            }
            Error::EmptyCell => write!(f, "discretization cell contains no feasible triangle"),
        }
    }
}

impl core::error::Error for Error {}
