use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Solver(#[from] mahm::Error64),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input or configuration, 3 for a solver that stopped short,
    /// 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        use mahm::Error as E;
        match self {
            CliError::Solver(e) if e.is_convergence_failure() => 3,
            CliError::Solver(
                E::NonMonotoneTime { .. }
                | E::ShapeMismatch { .. }
                | E::TooFewSamples { .. }
                | E::InvalidConfig(_)
                | E::AllMissing { .. },
            ) => 2,
            CliError::Solver(_) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "Io",
            CliError::Parse { .. } => "Parse",
            CliError::Config { .. } => "Config",
            CliError::Solver(e) => e.kind(),
        }
    }

    pub fn to_json(&self) -> Value {
        use mahm::Error as E;
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        let extra = match self {
            CliError::Io { path, .. } => json!({ "path": path }),
            CliError::Parse { row, .. } => json!({ "row": row }),
            CliError::Config { line, .. } => json!({ "line": line }),
            CliError::Solver(E::ShapeMismatch {
                row,
                expected,
                found,
            }) => json!({ "row": row, "expected": expected, "found": found }),
            CliError::Solver(E::NonMonotoneTime { index }) => json!({ "index": index }),
            CliError::Solver(E::AllMissing { row }) => json!({ "row": row }),
            CliError::Solver(E::NoConvergence {
                update_norm,
                tolerance,
                ..
            }) => json!({ "update_norm": update_norm, "tolerance": tolerance }),
            _ => json!({}),
        };
        if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
            base.extend(more);
        }
        v
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
