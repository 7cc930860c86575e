use thiserror::Error;

/// Error type shared by every module.
///
/// The CLI maps these onto its exit-code contract: config/validation -> 2,
/// resource cap -> 3, precision failure -> 4, audit failure -> 5.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: bad parameter, malformed spec, violated precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A configuration file failed to parse or used unknown keys.
    #[error("config error: {0}")]
    Config(String),

    /// A hard cap (table length, arc count, precision bits) was exceeded.
    #[error("resource cap exceeded: {what} (cap {cap})")]
    ResourceCap { what: String, cap: u64 },

    /// A comparison could not be certified within the precision cap.
    /// Never silently rounded; always surfaced.
    #[error("precision failure: {0}")]
    Precision(String),

    /// A theorem-backed inequality failed or an internal consistency check
    /// (e.g. ball disjointness) broke. Always a bug signal.
    #[error("audit failure: {0}")]
    Audit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn precision(msg: impl Into<String>) -> Self {
        Error::Precision(msg.into())
    }

    pub fn audit(msg: impl Into<String>) -> Self {
        Error::Audit(msg.into())
    }

    pub fn cap(what: impl Into<String>, cap: u64) -> Self {
        Error::ResourceCap { what: what.into(), cap }
    }
}
