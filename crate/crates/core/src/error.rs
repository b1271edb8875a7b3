use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or validator rejected a value. `name` is the user-facing
    /// parameter name so front ends can report the offending flag.
    #[error("{name} {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dynamics did not reach a fixed point within {max_steps} steps (last max change {last_change:e})")]
    NonConvergence { max_steps: usize, last_change: f64 },

    #[error("Chair-Varshney threshold is undefined for local errors pI={type_i}, pII={type_ii}")]
    DegenerateFusion { type_i: f64, type_ii: f64 },

    #[error("trial {trial} at sigma={sigma} failed: {source}")]
    Trial {
        sigma: f64,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("plan line {line}: key `{key}`: {reason}")]
    Plan {
        line: usize,
        key: String,
        reason: String,
    },

    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
