use thiserror::Error;

/// Validation failures raised by the analytic and simulation entry points.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: String,
    },

    #[error("edge count {count} is outside [0, {max}]")]
    EdgeCount { count: u64, max: u64 },

    #[error("{0}")]
    Ordering(String),

    #[error(
        "fluid limit is singular: endpoints {start} and {end} touch or straddle the \
         equilibrium density {equilibrium}; this is the logarithmic regime"
    )]
    FluidSingular {
        start: f64,
        end: f64,
        equilibrium: f64,
    },

    #[error("linear system dimension {dim} exceeds the oracle cap {cap}")]
    DimensionCap { dim: u64, cap: u64 },

    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, value: f64, expected: impl Into<String>) -> Error {
    Error::Domain {
        name,
        value,
        expected: expected.into(),
    }
}
