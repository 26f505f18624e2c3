use thiserror::Error;

/// Errors raised by the reduced-order modeling toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RomError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is singular (zero pivot at column {column})")]
    SingularMatrix { column: usize },

    #[error("snapshot matrix is empty or identically zero")]
    EmptyWindow,

    #[error("DEIM basis of size {requested} requested but snapshots only support {achievable}")]
    RankDeficient { requested: usize, achievable: usize },

    #[error("reduced matrix E_r is singular")]
    DegenerateBasis,

    #[error("non-finite state encountered at step {step}")]
    Divergence { step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trace lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed file: {0}")]
    Format(String),
}

impl From<std::io::Error> for RomError {
    fn from(e: std::io::Error) -> Self {
        RomError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RomError>;

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(RomError::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
