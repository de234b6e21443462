use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} = {value:.6e} rad/s lies outside the validity band [{lo:.6e}, {hi:.6e}] rad/s")]
    OutOfBand {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("validation failed: {0}")]
    Validation(String),
}

impl Error {
    /// Short machine-readable tag used for masked sweep cells.
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::OutOfBand { .. } => "out_of_band",
            Error::Degenerate(_) => "degenerate",
            Error::Config(_) => "config",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Validation(_) => "validation",
        }
    }
}
