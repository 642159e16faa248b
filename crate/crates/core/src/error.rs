use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter, configuration value or input length is invalid.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A scan range or evaluation point lies outside its admissible domain.
    #[error("out of range: {0}")]
    Range(String),
    /// Plug-in estimates make a statistic undefined (zero variance, non-explosive fit, ...).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    /// The input data carries no information for the requested computation.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// A value left the representable floating point range.
    #[error("numeric overflow: {0}")]
    Overflow(String),
    /// A least-squares fit could not be computed.
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
