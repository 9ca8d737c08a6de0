use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Tool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Tool(_) => 3,
        }
    }
}

impl From<ltlsyn_core::mine::MineError> for CliError {
    fn from(e: ltlsyn_core::mine::MineError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ltlsyn_core::datagen::GenError> for CliError {
    fn from(e: ltlsyn_core::datagen::GenError) -> Self {
        use ltlsyn_core::datagen::GenError;
        match e {
            GenError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ltlsyn_model::ModelError> for CliError {
    fn from(e: ltlsyn_model::ModelError) -> Self {
        use ltlsyn_model::ModelError;
        match e {
            ModelError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ltlsyn_eval::EvalError> for CliError {
    fn from(e: ltlsyn_eval::EvalError) -> Self {
        match e {
            ltlsyn_eval::EvalError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

impl From<ltlsyn_core::tokenizer::TokenizerError> for CliError {
    fn from(e: ltlsyn_core::tokenizer::TokenizerError) -> Self {
        CliError::Data(e.to_string())
    }
}
