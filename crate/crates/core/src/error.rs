use thiserror::Error;

/// Errors raised by the solvers and their supporting kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular matrix: zero pivot at row {row}")]
    Singular { row: usize },

    #[error("singular system at depth {depth}, term {term}: zero pivot at row {row}")]
    SingularStep {
        depth: usize,
        term: usize,
        row: usize,
    },

    #[error("normal equations are singular (n_terms too large for the sample set)")]
    SingularNormalEquations,

    #[error("degenerate characteristic polynomial (leading coefficient vanishes)")]
    DegeneratePolynomial,

    #[error("instability alarm at term {term}: |v| = {magnitude:.3e} exceeds {threshold:.3e}")]
    Unstable {
        term: usize,
        magnitude: f64,
        threshold: f64,
    },

    #[error("no transform parameter reaches the target error (best {best_error:.3e} at eta = {best_eta})")]
    NoEtaCandidate { best_eta: f64, best_error: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
