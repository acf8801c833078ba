use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// One problem found while reading or validating a scene configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", join_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("singular {size}x{size} system (pivot {pivot:e})")]
    Singular { size: usize, pivot: f64 },

    #[error("steady state kernel is degenerate or empty (pivot {pivot:e} at index {index})")]
    DegenerateKernel { index: usize, pivot: f64 },

    #[error("restricted solve is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("Hilbert space dimension {dim} exceeds the limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("steady state violates density matrix invariant: {0}")]
    InvalidDensity(String),

    #[error("cross-check failed: {what} deviates by {deviation:e} (tolerance {tolerance:e})")]
    CrossCheck {
        what: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("profiles are not periodic along the averaging axis: {0}")]
    NonPeriodic(String),

    #[error("unknown preset `{0}` (expected fig2, fig2-cavity or fig3)")]
    UnknownPreset(String),

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config(vec![ConfigIssue {
            line: None,
            key: key.into(),
            message: message.into(),
        }])
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
