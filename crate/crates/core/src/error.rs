use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension n = {0} is not supported (need n >= 2)")]
    Dimension(i64),

    #[error("Bessel order must be positive and finite, got {0}")]
    Order(f64),

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("Bessel evaluation lost accuracy at nu = {nu}, x = {x} (error estimate {estimate:e})")]
    AccuracyLoss { nu: f64, x: f64, estimate: f64 },

    #[error("no sign change of {which} for nu = {nu} found below the search horizon x = {horizon}")]
    Bracket { which: &'static str, nu: f64, horizon: f64 },

    #[error("radius R = {radius} violates the admissibility gate R < {bound}")]
    Inadmissible { radius: f64, bound: f64 },

    #[error("initial datum violates condition ({condition}): {detail}")]
    InitialCondition { condition: char, detail: String },

    #[error("amplitude ratio is unbounded near the origin (grows by {growth:.3} over the last decade)")]
    UnboundedRatio { growth: f64 },

    #[error("inner bridge for eps = {eps} cannot satisfy the derivative squeeze: {detail}")]
    Bridge { eps: f64, detail: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("Newton iteration failed at eps = {eps}, step {step}, t = {t}: {detail}")]
    Newton { eps: f64, step: usize, t: f64, detail: String },

    #[error("configuration error at `{path}`: {detail}")]
    Config { path: String, detail: String },

    #[error("io error on {path}: {detail}")]
    Io { path: String, detail: String },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }

    pub(crate) fn config(path: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            detail: err.to_string(),
        }
    }
}
