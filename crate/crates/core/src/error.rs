use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of a function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// A model object violated one of its structural invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The stationary-distribution system was singular; the chain has no
    /// unique stationary distribution.
    #[error("singular chain: {0}")]
    SingularChain(String),

    /// The stationary solve produced an entry too negative to be rounding.
    #[error("stationary distribution has negative entry {value} at level {level}")]
    NegativeStationary { level: usize, value: f64 },

    /// A simulation was misconfigured.
    #[error("simulation config error: {0}")]
    SimConfig(String),

    /// Loss of precision that the caller must not silently absorb.
    #[error("numerical instability: {0}")]
    Unstable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }
}
