use thiserror::Error;

/// Errors produced by the geometry, solver and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid construction: {0}")]
    Construction(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("inadmissible radius: {0}")]
    InadmissibleRadius(String),
    #[error("singular geometry: {0}")]
    Singular(String),
    #[error("degenerate metric recovery: {0}")]
    DegenerateRecovery(String),
    #[error("chart overflow: {0}")]
    ChartOverflow(String),
    #[error("linear solver failed: {0}")]
    Solver(String),
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("no connecting geodesic: {0}")]
    NotFound(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Same kind, message prefixed with the name of the failing check.
    pub fn in_check(self, check: &str) -> Self {
        let tag = |m: String| format!("[{check}] {m}");
        match self {
            Error::Domain(m) => Error::Domain(tag(m)),
            Error::Precondition(m) => Error::Precondition(tag(m)),
            Error::Construction(m) => Error::Construction(tag(m)),
            Error::NoSolution(m) => Error::NoSolution(tag(m)),
            Error::InadmissibleRadius(m) => Error::InadmissibleRadius(tag(m)),
            Error::Singular(m) => Error::Singular(tag(m)),
            Error::DegenerateRecovery(m) => Error::DegenerateRecovery(tag(m)),
            Error::ChartOverflow(m) => Error::ChartOverflow(tag(m)),
            Error::Solver(m) => Error::Solver(tag(m)),
            Error::InsufficientResolution(m) => Error::InsufficientResolution(tag(m)),
            Error::NotFound(m) => Error::NotFound(tag(m)),
            Error::Config(m) => Error::Config(tag(m)),
            Error::Io(m) => Error::Io(tag(m)),
        }
    }
}
