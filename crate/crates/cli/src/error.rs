use maskridge::experiment::ConfigIssue;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", list(.0))]
    Config(Vec<ConfigIssue>),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] maskridge::Error),
}

fn list(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numeric(maskridge::Error::InvalidParameter { .. } | maskridge::Error::Io { .. } | maskridge::Error::Parse { .. }) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}
