use std::path::Path;

use adiabat_core::Error;
use serde::Serialize;

pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// A failed command, reported on stderr as `{"error": {...}}`.
#[derive(Debug, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub exit_code: i32,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

impl Failure {
    pub fn schema(field: &str, message: &str) -> Failure {
        Failure {
            exit_code: EXIT_SCHEMA,
            kind: "schema".into(),
            field: (!field.is_empty()).then(|| field.to_string()),
            message: message.to_string(),
            s: None,
        }
    }

    pub fn usage(message: &str) -> Failure {
        Failure {
            kind: "usage".into(),
            ..Failure::schema("", message)
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Failure {
        Failure {
            exit_code: EXIT_IO,
            kind: "io".into(),
            field: None,
            message: format!("{}: {e}", path.display()),
            s: None,
        }
    }

    /// Input errors map to exit 2, everything else to exit 3.
    pub fn core(e: Error) -> Failure {
        Failure {
            exit_code: if e.is_input() { EXIT_SCHEMA } else { EXIT_NUMERICAL },
            kind: e.kind().to_string(),
            field: None,
            message: e.to_string(),
            s: e.location(),
        }
    }

    pub fn core_in(field: &str, e: Error) -> Failure {
        Failure {
            field: Some(field.to_string()),
            ..Failure::core(e)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::core(e)
    }
}
