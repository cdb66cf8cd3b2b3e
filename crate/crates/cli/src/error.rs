//! Process-level error handling: every failure carries the exit code it
//! maps to (1 usage, 2 data, 3 numerical).

use hazode::ErrorKind;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self { code: 1, message }
    }

    pub fn data(message: String) -> Self {
        Self { code: 2, message }
    }
}

impl From<hazode::Error> for CliError {
    fn from(e: hazode::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Config => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numeric => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data(format!("serialization failed: {e}"))
    }
}
