use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid entry law: {0}")]
    InvalidLaw(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("estimates come from different configurations: `{left}` vs `{right}`")]
    ConfigMismatch { left: String, right: String },

    #[error("quadrature did not converge: coarse {coarse:e}, fine {fine:e}")]
    NonConvergence { coarse: f64, fine: f64 },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
