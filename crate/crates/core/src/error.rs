use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("concentration {0} outside [0, 1]")]
    ConcentrationDomain(f64),

    #[error("apparent viscosity is singular: base {base} raised to shear index {index}")]
    ViscositySingularity { base: f64, index: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("profile has {got} values but the grid has {expected} nodes")]
    Alignment { expected: usize, got: usize },

    #[error("value {value} outside the admissible range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("banded matrix is singular at column {0}")]
    SingularMatrix(usize),

    #[error("matrix of order {0} is too large for the dense propagator (limit 64)")]
    DenseSize(usize),

    #[error("newton iteration failed to converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("non-finite value encountered in the right-hand side")]
    NonFinite,

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigValidation { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
