use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameters leave the regime where the dressed-state model is defined.
    #[error("regime error: {0}")]
    Regime(String),

    /// A function was called with an argument of the wrong shape or basis.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// A closed-form denominator vanished; use the numeric eigensystem instead.
    #[error(
        "degenerate spectrum: denominator {name} = {value:e} is below {tolerance:e}; \
         fall back to the numeric eigendecomposition"
    )]
    DegenerateSpectrum {
        name: &'static str,
        value: f64,
        tolerance: f64,
    },

    #[error(
        "integration accuracy error at t = {time}: {detail}; try a smaller step factor"
    )]
    IntegrationAccuracy { time: f64, detail: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}
