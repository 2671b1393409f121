use std::fmt;
use std::process::ExitCode;

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: parse errors, unresolved names, violated preconditions.
    Input(String),
    /// The analysis itself failed, e.g. the state cap was hit.
    Analysis(String),
}

impl CliError {
    pub fn input(message: impl fmt::Display) -> Self {
        CliError::Input(message.to_string())
    }

    pub fn analysis(message: impl fmt::Display) -> Self {
        CliError::Analysis(message.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Analysis(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Analysis(m) => f.write_str(m),
        }
    }
}

impl From<tickmc::engine::EngineError> for CliError {
    fn from(e: tickmc::engine::EngineError) -> Self {
        use tickmc::engine::EngineError;
        match e {
            EngineError::Query(_) | EngineError::Bind(_) | EngineError::StepOutOfRange { .. } => {
                CliError::input(e)
            }
            EngineError::Compose(_) | EngineError::ProbabilityOutOfRange(_) => CliError::analysis(e),
        }
    }
}

impl From<tickmc::model::BindError> for CliError {
    fn from(e: tickmc::model::BindError) -> Self {
        use tickmc::model::BindError;
        match e {
            BindError::Invalid(diagnostics) => CliError::Input(
                diagnostics
                    .iter()
                    .filter(|d| d.is_error())
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("\n"),
            ),
            other => CliError::input(other),
        }
    }
}

impl From<tickmc::composer::ComposeError> for CliError {
    fn from(e: tickmc::composer::ComposeError) -> Self {
        CliError::analysis(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
