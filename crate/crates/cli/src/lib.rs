//! Library surface of the CLI: file formats and subcommand implementations,
//! kept separate from argument parsing so they stay directly testable.

pub mod commands;
pub mod formats;

/// CLI-level error: core failures keep their exit codes, IO and JSON
/// problems exit with 1, argument validation with 2.
#[derive(Debug)]
pub enum CliError {
    Core(umedian_core::Error),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{}", e),
            CliError::Io(e) => write!(f, "io error: {}", e),
            CliError::Json(e) => write!(f, "json error: {}", e),
        }
    }
}

impl std::error::Error for CliError {}

impl From<umedian_core::Error> for CliError {
    fn from(e: umedian_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

/// Honor the `UMEDIAN_THREADS` cap before any parallel work runs. Absent or
/// unparsable values keep the machine default.
pub fn configure_threads() {
    if let Ok(value) = std::env::var("UMEDIAN_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        }
    }
}
