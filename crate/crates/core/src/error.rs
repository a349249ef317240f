use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("network structure: {0}")]
    Structure(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("z = {re}{im:+}i lies on the branch segment or too close to a pole")]
    BranchCut { re: f64, im: f64 },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("step failure: {0}")]
    Stiffness(String),

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("Laplace inversion did not converge: {0}")]
    Inversion(String),

    #[error("CFL condition violated: {0}")]
    Cfl(String),

    #[error("transport sign: {0}")]
    TransportSign(String),

    #[error("ambiguous regime: {0}")]
    Ambiguous(String),

    #[error("trial aborted after {events} events")]
    TrialAborted { events: u64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
