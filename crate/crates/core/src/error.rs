use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters that describe no valid physical setup.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Argument outside the domain of an operation.
    #[error("argument out of domain: {0}")]
    Domain(String),

    /// Adaptive integration ran out of panels.
    #[error("integration did not converge: value {value:e}, error estimate {err_estimate:e} after {panels} panels")]
    NotConverged {
        value: f64,
        err_estimate: f64,
        panels: usize,
    },

    /// The maximum condition of the envelope fit has no unique solution.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A time series does not resolve the oscillation it should contain.
    #[error("time series too coarse: {0}")]
    TooCoarse(String),

    /// An approximation was evaluated outside its range of validity.
    #[error("outside the validity range of the approximation: {0}")]
    OutOfValidity(String),
}
