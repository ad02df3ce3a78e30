use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridError;

/// What tripped a blow-up check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpKind {
    Gradient,
    FieldMagnitude,
    NonFinite,
}

/// Location and size of the first value that exceeded a cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub kind: BlowUpKind,
    pub field: String,
    pub theta: f64,
    pub eta: f64,
    pub v: f64,
    pub value: f64,
}

impl std::fmt::Display for BlowUp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.kind {
            BlowUpKind::Gradient => "gradient blow-up",
            BlowUpKind::FieldMagnitude => "field blow-up",
            BlowUpKind::NonFinite => "non-finite value",
        };
        write!(f, "{what} in {} at (θ={}, η={}, v={}): {}", self.field, self.theta, self.eta, self.v, self.value)
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{0}")]
    BlowUp(BlowUp),
    #[error("fixed-point iteration did not converge at v-level {level} (v={v}): last change {change:e} after {iterations} iterations")]
    NonConvergence { level: usize, v: f64, iterations: usize, change: f64 },
    #[error("step ratio k·|D|/h_η² = {ratio} exceeds {limit}")]
    StepRatio { ratio: f64, limit: f64 },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("non-finite coefficient: {0}")]
    NonFiniteCoefficient(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl SolveError {
    pub fn blow_up(&self) -> Option<&BlowUp> {
        match self {
            SolveError::BlowUp(b) => Some(b),
            _ => None,
        }
    }
}
