use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} is defined only for {domain}, got {value}")]
    Domain {
        what: &'static str,
        domain: &'static str,
        value: f64,
    },

    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimated error {error:e} after {intervals} intervals"
    )]
    QuadratureNonConvergence {
        lower: f64,
        upper: f64,
        error: f64,
        intervals: usize,
    },

    #[error("Mandel Q is undefined when the output mean photon number is zero")]
    MandelUndefined,

    #[error("temperature is undefined (T -> 0 limit) when the mean photon number is zero")]
    TemperatureUndefined,

    #[error("P function is not a proper Gaussian kernel: width m = {width}")]
    IllDefinedP { width: f64 },

    #[error("grid bounds do not cover the state: need {needed}, have {available}")]
    GridTooSmall { needed: String, available: String },

    #[error("quasiprobability grids are only available for Gaussian inputs (got {0})")]
    NonGaussianInput(&'static str),

    #[error("{0}")]
    Unsupported(&'static str),
}
