use serde::Serialize;
use thiserror::Error;

/// Failures reported by the runner, each rendered as one JSON object.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("run failed: {0}")]
    Run(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct Report<'a> {
    error: Body<'a>,
}

#[derive(Serialize)]
struct Body<'a> {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
            CliError::Invalid { .. } => "invalid-config",
            CliError::Run(_) => "run",
        }
    }

    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Invalid { .. } => 2,
            CliError::Io { .. } | CliError::Run(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let (field, message) = match self {
            CliError::Invalid { field, message } => (Some(field.as_str()), message.clone()),
            CliError::Parse(m) | CliError::Run(m) => (None, m.clone()),
            CliError::Io { .. } => (None, self.to_string()),
        };
        serde_json::to_string(&Report {
            error: Body {
                kind: self.kind(),
                field,
                message,
            },
        })
        .expect("error reports serialize")
    }
}

impl From<rbm_core::Error> for CliError {
    fn from(e: rbm_core::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<rbm_ewald::Error> for CliError {
    fn from(e: rbm_ewald::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<rbm_samplers::Error> for CliError {
    fn from(e: rbm_samplers::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_report() {
        let e = CliError::Invalid {
            field: "p".into(),
            message: "batch size must be ≥ 2, got 0".into(),
        };
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"]["kind"], "invalid-config");
        assert_eq!(v["error"]["field"], "p");
        assert_eq!(e.exit_code(), 2);
        assert_eq!(CliError::Run("x".into()).exit_code(), 1);
    }
}
