//! Library half of the `stp` binary: config parsing, the subcommand
//! implementations, and exit-code classification live here so integration
//! tests can drive them directly.

pub mod commands;
pub mod config;
pub mod settings;

pub use config::{schema_help, Config};

/// Errors classified by exit code: 2 config, 3 data, 4 divergence.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Divergence(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Divergence(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Divergence(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self {
            CliError::Config(_) => "config error",
            CliError::Data(_) => "data error",
            CliError::Divergence(_) => "training divergence",
        };
        write!(f, "{kind}: {}", self.message())
    }
}

impl std::error::Error for CliError {}

/// Map core errors onto the CLI's exit-code classes.
impl From<stp_core::Error> for CliError {
    fn from(e: stp_core::Error) -> Self {
        match e {
            stp_core::Error::Divergence(m) => CliError::Divergence(m),
            stp_core::Error::InvalidArgument(m) | stp_core::Error::ShapeMismatch(m) => {
                CliError::Config(m)
            }
            stp_core::Error::Format(m) | stp_core::Error::NonFinite(m) => CliError::Data(m),
            stp_core::Error::Io(e) => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Data root directory: the single environment knob. Everything else comes
/// from the config file and overrides.
pub const DATA_ROOT_ENV: &str = "STP_DATA_ROOT";

pub fn data_root() -> std::path::PathBuf {
    std::env::var_os(DATA_ROOT_ENV)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::path::PathBuf::from("data"))
}
