use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),

    #[error("negative {rate} rate {value:.6e} rad/ns: drive leaves the perturbative region")]
    NegativeRate { rate: &'static str, value: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("ODE integration failed at t = {t:.6} ns: {reason}")]
    Integration { t: f64, reason: String },

    #[error(
        "Fock truncation inadequate: top level occupation {occupation:.3e} exceeds {limit:.1e}"
    )]
    Truncation { occupation: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Floquet branch tracking is ambiguous: {0}")]
    ZoneFolding(String),

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("no spectroscopic ridge found: {0}")]
    RidgeNotFound(String),

    #[error("grid point ({axis1:.6}, {axis2:.6}): {source}")]
    GridPoint {
        axis1: f64,
        axis2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data file: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
