use std::path::PathBuf;

use rppg_core::Error as CoreError;

/// Failures raised by the front end itself.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config file {0} does not exist")]
    MissingConfig(PathBuf),
    #[error("invalid config {path}: {detail}")]
    Config { path: PathBuf, detail: String },
}

pub const USAGE_EXIT: u8 = 2;

/// Exit status for an error: the family code of the first library error in
/// the chain, 2 for usage errors.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::EmptySweep(_) => USAGE_EXIT,
                other => other.family().exit_code() as u8,
            };
        }
        if let Some(cli) = cause.downcast_ref::<CliError>() {
            return match cli {
                CliError::Usage(_) => USAGE_EXIT,
                CliError::MissingConfig(_) => 3,
                CliError::Config { .. } => 4,
            };
        }
    }
    1
}
