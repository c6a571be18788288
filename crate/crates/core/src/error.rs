//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories surfaced by the library.
///
/// The CLI maps these onto process exit codes, so the variants are kept
/// coarse and stable.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed data: dimension mismatches, ragged location lists, empty
    /// inputs, non-finite coordinates.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter outside its documented range (epsilon <= 0, delta
    /// outside (0,1), phi >= epsilon, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configurable cap would be exceeded (traversal enumeration, lattice
    /// cell count). The message names the cap and what would satisfy it.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// The instance admits no positive cost lower bound, so the lattice
    /// construction cannot run. Use the sampled-support Monte-Carlo mode.
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// An exhaustive audit or a guaranteed inequality failed. This is a
    /// genuine bug signal, never expected on valid inputs.
    #[error("audit failure: {0}")]
    AuditFailure(String),

    /// Internal invariant broken (e.g. non-exact polynomial division).
    #[error("internal consistency: {0}")]
    Internal(String),
}

impl Error {
    /// Stable process exit code for the CLI surface.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::InvalidParameter(_) => 2,
            Error::ResourceLimit(_) => 3,
            Error::DegenerateInstance(_) => 4,
            Error::AuditFailure(_) | Error::Internal(_) => 5,
        }
    }
}
