use std::fmt;

use serde_json::{json, Value};

/// Process exit status of a failed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Validation = 2,
    Numerical = 3,
    BadInput = 4,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Validation => "validation_failure",
            Status::Numerical => "numerical_failure",
            Status::BadInput => "bad_input",
        }
    }
}

/// An error that already knows its exit status.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn bad_input(message: impl Into<String>) -> Self {
        Self { status: Status::BadInput, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self { status: Status::Validation, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn classify(err: &anyhow::Error) -> Status {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.status;
        }
        if let Some(e) = cause.downcast_ref::<mad_core::Error>() {
            return if e.is_numerical() { Status::Numerical } else { Status::BadInput };
        }
    }
    Status::BadInput
}

/// `{code, message, context}` for stderr.
pub fn error_json(command: &str, err: &anyhow::Error) -> Value {
    let status = classify(err);
    let chain: Vec<String> = err.chain().map(|c| c.to_string()).collect();
    json!({
        "code": status.label(),
        "message": err.to_string(),
        "context": {
            "command": command,
            "exit_status": status as i32,
            "causes": chain,
        },
    })
}
