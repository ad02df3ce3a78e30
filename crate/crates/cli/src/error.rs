use gwd_core::error::SolveError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(SolveError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BlowUp(_) | SolveError::NonConvergence { .. } | SolveError::NonFiniteCoefficient(_) => CliError::Solver(e),
            SolveError::InvalidData(_) | SolveError::StepRatio { .. } | SolveError::Grid(_) => CliError::Config(e.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Solver(_) => "solver",
            CliError::Verification(_) => "verification",
        }
    }

    /// One-line JSON diagnostic for standard error.
    pub fn diagnostic(&self) -> String {
        let blow_up = match self {
            CliError::Solver(e) => e.blow_up().map(|b| serde_json::to_value(b).unwrap_or_default()),
            _ => None,
        };
        json!({
            "status": "error",
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "blow_up": blow_up,
        })
        .to_string()
    }
}

pub fn io<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Io(format!("{context}: {e}"))
}
