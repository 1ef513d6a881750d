use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("t = {t} lies outside the domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("level crossing: omega_ab({t}) = {value} must be > 0")]
    LevelCrossing { t: f64, value: f64 },

    #[error("degenerate coupling: mu_ab({t}) = 0 inside the pulse support")]
    DegenerateCoupling { t: f64 },

    #[error(
        "negative tau-map integrand {value} at t = {t}; absorb the sign of mu_ab into its phase convention so that mu_ab >= 0"
    )]
    Orientation { t: f64, value: f64 },

    #[error(
        "tau = {tau} lies in a flat segment of the tau map (t in [{t_lo}, {t_hi}] all map to it)"
    )]
    TauAmbiguity { tau: f64, t_lo: f64, t_hi: f64 },

    #[error("integration failed at {coordinate} = {at}: {reason}")]
    Integration {
        coordinate: &'static str,
        at: f64,
        reason: String,
    },

    #[error("chirp design failed: iterate {iteration} became non-positive ({value}) at t = {t}")]
    DesignFailure {
        iteration: usize,
        t: f64,
        value: f64,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
