use halfwalk::WalkError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {field}: {message}")]
    Config { field: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(WalkError),

    #[error("{0}")]
    Walk(WalkError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("strict mode: {0}")]
    Inconclusive(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Inconclusive(_) => 4,
            CliError::Walk(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Attaches the config field responsible for a library validation error.
    pub fn from_walk(err: WalkError) -> Self {
        match err {
            WalkError::ZeroCoupling { name } => CliError::config(
                name,
                "coupling must be nonzero (both hopping amplitudes gamma0 and gamma1 must not be zero)",
            ),
            WalkError::BadSize(n) => {
                CliError::config("n_sites", format!("{n} must be an even integer >= 4"))
            }
            WalkError::NonPositiveStep(dt) => {
                CliError::config("dt", format!("time step must be positive, got {dt}"))
            }
            WalkError::NonPositiveS(s) => {
                CliError::config("s", format!("Laplace variable must be positive, got {s}"))
            }
            WalkError::ZeroPhi0 => CliError::config("phi0_re", "phi0 must be nonzero"),
            WalkError::NotNormalizable => CliError::config(
                "normalized",
                "the invariant state is normalizable only when |gamma0| < |gamma1|",
            ),
            WalkError::InvalidConfig(msg) => CliError::config("config", msg),
            e @ WalkError::NonFiniteDetected { .. } => CliError::Numerical(e),
            e => CliError::Walk(e),
        }
    }
}

impl From<WalkError> for CliError {
    fn from(err: WalkError) -> Self {
        CliError::from_walk(err)
    }
}
