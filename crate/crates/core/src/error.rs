use std::path::PathBuf;

use crate::geometry::Vec2;

/// Errors produced by the simulator core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("point ({x}, {y}, {z}) is within 1e-6 m of transducer {index}")]
    CoincidentPoint {
        index: usize,
        x: f64,
        y: f64,
        z: f64,
    },

    #[error("equilibrium solver did not converge after {iterations} iterations (last tilt = ({:.6e}, {:.6e}) rad, residual = {residual:.3e} N·m)", last.x, last.y)]
    NonConvergence {
        iterations: usize,
        last: Vec2,
        residual: f64,
    },

    #[error("tick {tick}: {source}")]
    Tick {
        tick: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("tracking lost: {0}")]
    TrackingLost(String),

    #[error("profile input: {0}")]
    Profile(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid scenario key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Innermost error, looking through tick wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Tick { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
