use std::fmt;

use thiserror::Error;

/// One problem found while validating a scenario configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigViolation {
    /// Dotted key path, e.g. `numerics.dt`.
    pub key: String,
    pub message: String,
}

impl ConfigViolation {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration ({} problem(s)): {}", .0.len(), join_violations(.0))]
    Validation(Vec<ConfigViolation>),

    #[error("could not parse configuration: {0}")]
    Parse(String),

    #[error("particle {id}: {found} neighbors within h, at least {required} required")]
    InsufficientStencil { id: u64, found: usize, required: usize },

    #[error("particle {id}: degenerate stencil (condition estimate {condition:.3e})")]
    DegenerateStencil { id: u64, condition: f64 },

    #[error("spatial index is stale, rebuild it after moving particles")]
    StaleIndex,

    #[error("particle {id} has an empty smoothing neighborhood")]
    EmptyNeighborhood { id: u64 },

    #[error("Gauss-Seidel did not converge in {sweeps} sweeps (relative change {relative_change:.3e})")]
    NotConverged { sweeps: usize, relative_change: f64 },

    #[error("void at ({x:.6}, {y:.6}) has no particles within 2h")]
    UnfillableVoid { x: f64, y: f64 },

    #[error("step {step} (t = {time:.6} s) failed: {source}")]
    Step {
        step: u64,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[ConfigViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
