use std::fmt;
use std::path::Path;

use phdae_core::Error;
use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Config,
    Model,
    Study,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Config | Kind::Model => 1,
            Kind::Study => 2,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Model => "model",
            Kind::Study => "study",
        }
    }
}

/// A failed run with a stable code and a human-readable message.
#[derive(Clone, Debug)]
pub struct Failure {
    pub kind: Kind,
    pub code: &'static str,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Config,
            code: "invalid_argument",
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            kind: Kind::Config,
            code: "io",
            message: format!("{}: {e}", path.display()),
        }
    }

    /// One JSON object on one line.
    pub fn line(&self) -> String {
        json!({
            "status": "error",
            "kind": self.kind.label(),
            "code": self.code,
            "exit": self.kind.exit_code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, code) = match &e {
            Error::InvalidParameter(_) => (Kind::Config, "invalid_parameter"),
            Error::InvalidGrid(_) => (Kind::Config, "invalid_grid"),
            Error::InvalidModel(_) => (Kind::Model, "invalid_model"),
            Error::ModelFile(_) => (Kind::Model, "model_file"),
            Error::TopologyError(_) => (Kind::Model, "topology"),
            Error::InvalidInput(_) => (Kind::Model, "invalid_input"),
            Error::IndexTooHigh => (Kind::Model, "index_too_high"),
            Error::Dimension(_) => (Kind::Model, "dimension"),
            Error::NotSymmetric(_) => (Kind::Model, "not_symmetric"),
            Error::NotSpd(_) => (Kind::Model, "not_spd"),
            Error::TargetUnreachable { .. } => (Kind::Study, "target_unreachable"),
            Error::NoStabilization => (Kind::Study, "no_stabilization"),
            Error::DegenerateError(_) => (Kind::Study, "degenerate_error"),
            Error::StepUnderflow { .. } => (Kind::Study, "step_underflow"),
            Error::AllZero => (Kind::Study, "all_zero"),
            Error::SingularStep { .. } => (Kind::Study, "singular_step"),
            Error::SingularMatrix { .. } => (Kind::Study, "singular_matrix"),
            Error::NoConvergence => (Kind::Study, "no_convergence"),
            Error::NonFinite(_) => (Kind::Study, "non_finite"),
            Error::GridMismatch => (Kind::Study, "grid_mismatch"),
        };
        Self {
            kind,
            code,
            message: e.to_string(),
        }
    }
}
