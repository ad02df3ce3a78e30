pub mod classify;
pub mod dual;
pub mod error;
pub mod grid;
pub mod einstein;
mod march;
pub mod optics;
pub mod ricci;
pub mod variational;
pub mod profiles;

pub use error::{BlowUp, BlowUpKind, SolveError};
pub use grid::{BoundaryMode, ConvergenceReport, Grid3, GridError, GridFunction};
pub use profiles::Profile;
