use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Euler-rate transform is singular at |pitch| = π/2.
    #[error("gimbal lock: pitch {pitch} rad is within 1e-6 of ±π/2")]
    GimbalLock { pitch: f64 },

    #[error("non-finite value produced by {context}")]
    NonFinite { context: &'static str },

    #[error("covariance is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("covariance is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid measurement from `{sensor}`: {reason}")]
    InvalidMeasurement { sensor: String, reason: String },

    #[error("singular innovation covariance for measurement from `{sensor}`")]
    SingularInnovation { sensor: String },

    #[error("late measurement from `{sensor}`: t = {measurement_time} s precedes filter time {filter_time} s")]
    LateMeasurement {
        sensor: String,
        measurement_time: f64,
        filter_time: f64,
    },

    #[error("negative time step {dt}")]
    NegativeTimeStep { dt: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate trajectory: {0}")]
    DegenerateTrajectory(String),

    /// A parameter failed validation. `key` is the dotted config path.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("empty run log")]
    EmptyLog,

    #[error("scenario `{label}` (seed {seed}) failed: {source}")]
    Scenario {
        label: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
