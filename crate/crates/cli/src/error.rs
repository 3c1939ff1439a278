use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 2 input/config, 3 computation, 4 i/o.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<twostage_core::Error> for CliError {
    fn from(e: twostage_core::Error) -> Self {
        use twostage_core::Error as E;
        match e {
            E::Parse { .. } => CliError::Input(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}
