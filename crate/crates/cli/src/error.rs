use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Physics(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Physics(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<klyshko_core::Error> for CliError {
    fn from(e: klyshko_core::Error) -> Self {
        if e.is_physics_guard() {
            CliError::Physics(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
