use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A problem with one config field, named by its JSON path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        FieldError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config:\n{}", list(.0))]
    Invalid(Vec<FieldError>),

    #[error("numeric failure: {0}")]
    Numeric(#[from] fracshape_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The bounds audit ran and at least one check failed.
    #[error("audit failed: {}", .0.join(", "))]
    AuditFailed(Vec<String>),

    /// Some experiments of a batch failed; their messages in batch order.
    #[error("{} of the batch experiments failed:\n{}", .0.len(), .0.join("\n"))]
    Batch(Vec<String>),
}

fn list(errs: &[FieldError]) -> String {
    errs.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Invalid(vec![FieldError::new(field, message)])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad configs, 3 for a failed audit, 1 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::AuditFailed(_) => 3,
            _ => 1,
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Invalid(errs) => serde_json::json!({
                "error": "invalid-config",
                "fields": errs.iter().map(|e| serde_json::json!({"field": e.field, "message": e.message})).collect::<Vec<_>>(),
            }),
            CliError::Numeric(e) => serde_json::json!({"error": "numeric", "message": e.to_string(), "detail": format!("{e:?}")}),
            CliError::Io { path, source } => {
                serde_json::json!({"error": "io", "path": path.display().to_string(), "message": source.to_string()})
            }
            CliError::AuditFailed(names) => serde_json::json!({"error": "audit-failed", "checks": names}),
            CliError::Batch(msgs) => serde_json::json!({"error": "batch", "failures": msgs}),
        }
    }
}
