use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("numeric: {0}")]
    Numeric(#[from] kinproof::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
            CliError::Verification(_) => "verification",
        }
    }

    /// 2 config or usage, 3 numeric or io, 4 verification.
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let detail = match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Verification(m) => m.clone(),
            CliError::Numeric(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        };
        serde_json::json!({
            "status": "error",
            "kind": self.kind(),
            "code": self.code(),
            "message": detail,
        })
        .to_string()
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}
