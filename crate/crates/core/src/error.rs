use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed simplex {vertices:?}: vertices must be non-empty and strictly increasing")]
    MalformedSimplex { vertices: Vec<u32> },

    #[error("simplex {0:?} is not in the complex")]
    NotInComplex(Vec<u32>),

    #[error("complex is not face-closed: face {0:?} missing")]
    NotFaceClosed(Vec<u32>),

    #[error("cochain degree {degree} out of range for a complex of dimension {dim:?}")]
    DegreeOutOfRange { degree: usize, dim: Option<usize> },

    #[error("cochain has {got} bits but the complex has {expected} simplices of dimension {degree}")]
    CochainLength {
        degree: usize,
        expected: usize,
        got: usize,
    },

    #[error("cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: String,
        needed: u128,
        cap: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("routes disagree for {what}: {detail}")]
    RouteMismatch { what: String, detail: String },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("malformed hex string: {0}")]
    Hex(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by a resource guard rather than bad input.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
