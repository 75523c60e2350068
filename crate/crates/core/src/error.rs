use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model parameters or run configuration.
    #[error("config error: {0}")]
    Config(String),
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Operation not defined for the given model kind.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    /// A numerical routine failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A single replication generated more events than the safety cap allows.
    #[error("event cap exceeded: more than {cap} events in one replication")]
    EventCapExceeded { cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
