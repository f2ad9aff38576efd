use serde::Serialize;
use sphermoments_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A validation suite failed or a reported bound is violated.
    pub const FAILURE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Input { message: String, violations: Vec<String> },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input { message: message.into(), violations: Vec::new() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => exit::INPUT,
            CliError::Io(_) => exit::IO,
        }
    }

    /// `{"schema": "1", "error": {...}}`, printed on stdout.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'static str,
            code: i32,
            message: String,
            #[serde(skip_serializing_if = "<[String]>::is_empty")]
            violations: &'a [String],
        }
        #[derive(Serialize)]
        struct Envelope<'a> {
            schema: &'static str,
            error: Body<'a>,
        }
        let (kind, violations): (_, &[String]) = match self {
            CliError::Input { violations, .. } => ("input", violations),
            CliError::Io(_) => ("io", &[]),
        };
        let envelope =
            Envelope { schema: "1", error: Body { kind, code: self.exit_code(), message: self.to_string(), violations } };
        crate::json::to_string(&envelope).expect("error envelope serializes")
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match &err {
            CoreError::Validation(list) => CliError::Input {
                message: err.to_string(),
                violations: list.iter().map(ToString::to_string).collect(),
            },
            _ => CliError::input(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
