use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("laser at {laser_hz} Hz is within {guard_hz} Hz of the resonance at {line_hz} Hz")]
    Pole {
        laser_hz: f64,
        line_hz: f64,
        guard_hz: f64,
    },

    #[error("line catalog is empty")]
    EmptyCatalog,

    #[error("Fock distribution truncated at n_max = {n_max}: tail {tail:.3e} exceeds tolerance {tolerance:.1e}; increase n_max")]
    Truncation {
        n_max: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("indeterminate classification: no shots were kept")]
    Indeterminate,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("fit iterate for the line center collided with the data point at {0} Hz")]
    PoleCollision(f64),

    #[error("negative Einstein-A coefficient {0:.4e} s^-1 after subtracting other catalog lines")]
    NegativeA(f64),

    #[error("mass correction already applied to this data point")]
    MassCorrectionApplied,

    #[error("line not found in catalog: {0}")]
    LineNotFound(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for numerical failures of an iterative fit, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_) | Error::PoleCollision(_))
    }
}
